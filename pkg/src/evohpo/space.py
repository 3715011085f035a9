"""Mixed-type search spaces with conditionally sized list parameters.

A space is an ordered collection of parameters. Scalar ("static")
parameters always come first, list-valued ("dynamic") parameters last.
Every dynamic parameter is paired with a static integer controller whose
assigned value says how many list elements a decoded setting keeps.

The whole space flattens to a fixed number of scalar axes, each living in
the continuous box [0, 1], so a fixed-dimension continuous optimizer can
drive it: a dynamic parameter always contributes ``max_len`` axes, and
surplus elements are decoded but discarded. Axis codecs:

* continuous: affine map onto [lo, hi]
* stepped int: ``lo + step * round(x * (hi - lo) / step)``, round half-up
* categorical with K options: ``index = min(floor(x * K), K - 1)``

Components are clamped into [0, 1] before decoding; out-of-box proposals
therefore decode to boundary values.
"""

from __future__ import annotations

import numbers
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np
import yaml

__all__ = [
    "SpaceError",
    "Continuous",
    "SteppedInt",
    "Categorical",
    "ParamSpec",
    "Axis",
    "Setting",
    "SearchSpace",
    "parse_space",
    "load_space",
    "space_to_dict",
    "space_from_dict",
]


class SpaceError(ValueError):
    """Invalid space config, setting, or axis vector."""


@dataclass(frozen=True)
class Continuous:
    lo: float
    hi: float

    def check(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise SpaceError(f"continuous bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise SpaceError(f"continuous domain needs lo < hi, got [{self.lo}, {self.hi}]")

    def contains(self, value) -> bool:
        return (
            isinstance(value, numbers.Real)
            and not isinstance(value, bool)
            and self.lo <= float(value) <= self.hi
        )

    def decode_axis(self, x: float) -> float:
        return float(self.lo + x * (self.hi - self.lo))

    def encode_value(self, value) -> float:
        return (float(value) - self.lo) / (self.hi - self.lo)


@dataclass(frozen=True)
class SteppedInt:
    lo: int
    hi: int
    step: int

    def check(self) -> None:
        if self.step < 1:
            raise SpaceError(f"step must be a positive integer, got {self.step}")
        if self.lo > self.hi:
            raise SpaceError(f"int domain needs lo <= hi, got [{self.lo}, {self.hi}]")
        if (self.hi - self.lo) % self.step != 0:
            raise SpaceError(
                f"int range {self.hi - self.lo} not divisible by step {self.step}"
            )

    def contains(self, value) -> bool:
        return (
            isinstance(value, numbers.Integral)
            and not isinstance(value, bool)
            and self.lo <= int(value) <= self.hi
            and (int(value) - self.lo) % self.step == 0
        )

    def decode_axis(self, x: float) -> int:
        if self.hi == self.lo:
            return self.lo
        # round half-up, not banker's rounding
        k = int(np.floor(x * (self.hi - self.lo) / self.step + 0.5))
        return self.lo + self.step * k

    def encode_value(self, value) -> float:
        if self.hi == self.lo:
            return 0.0
        return (int(value) - self.lo) / (self.hi - self.lo)


@dataclass(frozen=True)
class Categorical:
    options: tuple

    def check(self) -> None:
        if not self.options:
            raise SpaceError("categorical domain needs at least one option")
        if len(set(self.options)) != len(self.options):
            raise SpaceError(f"duplicate categorical options: {self.options}")

    def contains(self, value) -> bool:
        return value in self.options

    def decode_axis(self, x: float):
        k = len(self.options)
        return self.options[min(int(x * k), k - 1)]

    def encode_value(self, value) -> float:
        # bin midpoint, so the decode floor recovers the index robustly
        return (self.options.index(value) + 0.5) / len(self.options)


Domain = Union[Continuous, SteppedInt, Categorical]


@dataclass(frozen=True)
class ParamSpec:
    """One parameter: a scalar, or a controller-sized list of scalars.

    A dynamic parameter (``controller`` set) contributes ``max_len`` axes
    and decodes to a list whose length equals the decoded controller value.
    """

    name: str
    domain: Domain
    controller: str | None = None
    max_len: int | None = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.isidentifier():
            raise SpaceError(f"parameter name must be an identifier, got {self.name!r}")
        self.domain.check()
        if (self.controller is None) != (self.max_len is None):
            raise SpaceError(
                f"{self.name}: controller and max_len must be given together"
            )
        if self.max_len is not None and self.max_len < 1:
            raise SpaceError(f"{self.name}: max_len must be positive, got {self.max_len}")
        if self.controller == self.name:
            raise SpaceError(f"{self.name}: parameter cannot control itself")

    @property
    def is_dynamic(self) -> bool:
        return self.controller is not None

    @property
    def axis_count(self) -> int:
        return self.max_len if self.is_dynamic else 1


@dataclass(frozen=True)
class Axis:
    """One scalar coordinate of the flattened space."""

    param: str
    element: int | None  # 0-based list position for dynamic axes, None for statics
    domain: Domain

    @property
    def label(self) -> str:
        return self.param if self.element is None else f"{self.param}[{self.element + 1}]"


class Setting(Mapping):
    """One concrete assignment: scalars for static parameters, lists for
    dynamic ones (list length = the assigned controller value)."""

    __slots__ = ("_values",)

    def __init__(self, assignments: Mapping):
        self._values = {
            k: list(v) if isinstance(v, (list, tuple)) else v
            for k, v in assignments.items()
        }

    def __getitem__(self, name: str):
        return self._values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __eq__(self, other) -> bool:
        if isinstance(other, Setting):
            return self._values == other._values
        if isinstance(other, dict):
            return self._values == other
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._values.items())
        return f"Setting({inner})"

    def as_dict(self) -> dict:
        """Plain-JSON-able copy."""
        return {k: list(v) if isinstance(v, list) else v for k, v in self._values.items()}


class SearchSpace:
    """Ordered parameter collection, statics first.

    Construction reorders the given specs stably (all static parameters
    before all dynamic ones, original order preserved within each group)
    and validates controller pairings: a controller must be a static
    stepped-int parameter with ``lo >= 1`` and ``hi == max_len`` of every
    list it controls.
    """

    def __init__(self, params: Sequence[ParamSpec]):
        ordered = [p for p in params if not p.is_dynamic] + [
            p for p in params if p.is_dynamic
        ]
        names = [p.name for p in ordered]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise SpaceError(f"duplicate parameter names: {sorted(dupes)}")
        by_name = {p.name: p for p in ordered}
        for p in ordered:
            if not p.is_dynamic:
                continue
            ctrl = by_name.get(p.controller)
            if ctrl is None:
                raise SpaceError(f"{p.name}: controller {p.controller!r} not found")
            if ctrl.is_dynamic:
                raise SpaceError(
                    f"{p.name}: controller {ctrl.name!r} must be static, not dynamic"
                )
            if not isinstance(ctrl.domain, SteppedInt):
                raise SpaceError(
                    f"{p.name}: controller {ctrl.name!r} must be a stepped int parameter"
                )
            if ctrl.domain.lo < 1:
                raise SpaceError(
                    f"{p.name}: controller {ctrl.name!r} must have lo >= 1, got {ctrl.domain.lo}"
                )
            if ctrl.domain.hi != p.max_len:
                raise SpaceError(
                    f"{p.name}: max_len {p.max_len} inconsistent with controller "
                    f"{ctrl.name!r} range hi={ctrl.domain.hi}"
                )
        self._params = tuple(ordered)
        self._by_name = by_name
        axes: list[Axis] = []
        for p in self._params:
            if p.is_dynamic:
                axes.extend(Axis(p.name, j, p.domain) for j in range(p.max_len))
            else:
                axes.append(Axis(p.name, None, p.domain))
        self._axes = tuple(axes)

    @property
    def params(self) -> tuple:
        return self._params

    @property
    def names(self) -> tuple:
        return tuple(p.name for p in self._params)

    @property
    def axis_count(self) -> int:
        return len(self._axes)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __getitem__(self, name: str) -> ParamSpec:
        return self._by_name[name]

    def __eq__(self, other) -> bool:
        return isinstance(other, SearchSpace) and self._params == other._params

    def __repr__(self) -> str:
        return f"SearchSpace({[p.name for p in self._params]}, axes={self.axis_count})"

    def flatten(self) -> list:
        """Scalar axes in decode order: statics, then each dynamic list
        element by element."""
        return list(self._axes)

    def controlled_by(self, name: str) -> list:
        """Dynamic parameters whose length the named parameter controls."""
        return [p for p in self._params if p.controller == name]

    def decode(self, vector) -> Setting:
        """Map a real vector of length ``axis_count`` to a Setting.

        Components are clamped into [0, 1]; controllers decode before the
        lists they size, and each list keeps only its first ``controller
        value`` elements.
        """
        arr = np.asarray(vector, dtype=float)
        if arr.shape != (self.axis_count,):
            raise SpaceError(
                f"expected vector of length {self.axis_count}, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise SpaceError("vector has non-finite components")
        x = np.clip(arr, 0.0, 1.0)
        out: dict = {}
        i = 0
        for p in self._params:
            if not p.is_dynamic:
                out[p.name] = p.domain.decode_axis(float(x[i]))
                i += 1
            else:
                keep = out[p.controller]
                out[p.name] = [
                    p.domain.decode_axis(float(x[i + j])) for j in range(keep)
                ]
                i += p.max_len
        return Setting(out)

    def encode(self, setting: Setting, fill: float = 0.0) -> np.ndarray:
        """Inverse of decode for every populated element.

        Unused dynamic axes take the value ``fill``; any fill round-trips
        because decode discards those axes again.
        """
        self.validate_setting(setting)
        vec = np.full(self.axis_count, float(fill))
        i = 0
        for p in self._params:
            if not p.is_dynamic:
                vec[i] = p.domain.encode_value(setting[p.name])
                i += 1
            else:
                for j, v in enumerate(setting[p.name]):
                    vec[i + j] = p.domain.encode_value(v)
                i += p.max_len
        return vec

    def validate_setting(self, setting: Mapping, allow_sentinel: bool = False) -> None:
        """Check a full assignment against the space.

        With ``allow_sentinel`` a controller may be 0 (meaning "no layers")
        provided every list it controls is empty, and a categorical value
        may be None (meaning "switched off"). Sentinels are never produced
        by decode; they exist for baseline defaults and mode masks.
        """
        missing = set(self.names) - set(setting)
        extra = set(setting) - set(self.names)
        if missing or extra:
            raise SpaceError(
                f"setting keys do not match space (missing={sorted(missing)}, "
                f"extra={sorted(extra)})"
            )
        for p in self._params:
            value = setting[p.name]
            if p.is_dynamic:
                if not isinstance(value, (list, tuple)):
                    raise SpaceError(f"{p.name}: expected a list, got {value!r}")
                want = setting[p.controller]
                if len(value) != want:
                    raise SpaceError(
                        f"{p.name}: list length {len(value)} != controller "
                        f"{p.controller}={want}"
                    )
                for j, v in enumerate(value):
                    if not p.domain.contains(v):
                        raise SpaceError(f"{p.name}[{j + 1}]: {v!r} outside {p.domain}")
            else:
                if allow_sentinel and value is None and isinstance(p.domain, Categorical):
                    continue
                if (
                    allow_sentinel
                    and value == 0
                    and isinstance(p.domain, SteppedInt)
                    and self.controlled_by(p.name)
                ):
                    continue
                if not p.domain.contains(value):
                    raise SpaceError(f"{p.name}: {value!r} outside {p.domain}")


_DOMAIN_KEYS = {
    "continuous": {"lo", "hi"},
    "int": {"lo", "hi", "step"},
    "categorical": {"options"},
}


def _parse_param(entry: dict, raw_entries: dict) -> ParamSpec:
    if not isinstance(entry, dict):
        raise SpaceError(f"parameter entry must be a mapping, got {entry!r}")
    known = {"name", "type", "lo", "hi", "step", "options", "list_of", "max_len"}
    unknown = set(entry) - known
    if unknown:
        raise SpaceError(f"unknown keys {sorted(unknown)} in parameter {entry.get('name')!r}")
    try:
        name = entry["name"]
        kind = entry["type"]
    except KeyError as exc:
        raise SpaceError(f"parameter entry missing {exc} field: {entry!r}") from None
    if kind not in _DOMAIN_KEYS:
        raise SpaceError(f"{name}: unknown type {kind!r} (use continuous|int|categorical)")
    need = _DOMAIN_KEYS[kind] - set(entry)
    if need and need != {"step"}:
        raise SpaceError(f"{name}: missing fields {sorted(need)} for type {kind!r}")
    if kind == "continuous":
        domain: Domain = Continuous(float(entry["lo"]), float(entry["hi"]))
    elif kind == "int":
        domain = SteppedInt(int(entry["lo"]), int(entry["hi"]), int(entry.get("step", 1)))
    else:
        options = entry["options"]
        if not isinstance(options, (list, tuple)):
            raise SpaceError(f"{name}: options must be a list")
        domain = Categorical(tuple(options))
    controller = entry.get("list_of")
    max_len = entry.get("max_len")
    if controller is not None and max_len is None:
        # infer the capacity from the controller's upper bound
        ctrl = raw_entries.get(controller)
        if ctrl is None:
            raise SpaceError(f"{name}: controller {controller!r} not found")
        try:
            max_len = int(ctrl["hi"])
        except (KeyError, TypeError, ValueError):
            raise SpaceError(
                f"{name}: cannot infer max_len from controller {controller!r}"
            ) from None
    return ParamSpec(
        name,
        domain,
        controller=controller,
        max_len=int(max_len) if max_len is not None else None,
    )


def parse_space(config_text: str) -> SearchSpace:
    """Parse a space config (YAML, one block per parameter) into a
    validated SearchSpace.

    Each block gives ``name``, ``type`` (continuous|int|categorical), the
    domain fields (``lo``/``hi``/``step`` or ``options``), and for dynamic
    parameters ``list_of`` (controller name) plus optional ``max_len``
    (inferred from the controller's ``hi`` when omitted).
    """
    try:
        data = yaml.safe_load(config_text)
    except yaml.YAMLError as exc:
        raise SpaceError(f"malformed space config: {exc}") from exc
    return space_from_dict(data)


def space_from_dict(data) -> SearchSpace:
    """Build a SearchSpace from the parsed config structure."""
    if not isinstance(data, dict) or "params" not in data:
        raise SpaceError("space config must be a mapping with a 'params' list")
    entries = data["params"]
    if not isinstance(entries, list) or not entries:
        raise SpaceError("'params' must be a non-empty list")
    raw_by_name = {e.get("name"): e for e in entries if isinstance(e, dict)}
    return SearchSpace([_parse_param(e, raw_by_name) for e in entries])


def space_to_dict(space: SearchSpace) -> dict:
    """Inverse of ``space_from_dict`` (used for config snapshots)."""
    out = []
    for p in space.params:
        d: dict = {"name": p.name}
        if isinstance(p.domain, Continuous):
            d.update(type="continuous", lo=p.domain.lo, hi=p.domain.hi)
        elif isinstance(p.domain, SteppedInt):
            d.update(type="int", lo=p.domain.lo, hi=p.domain.hi, step=p.domain.step)
        else:
            d.update(type="categorical", options=list(p.domain.options))
        if p.is_dynamic:
            d.update(list_of=p.controller, max_len=p.max_len)
        out.append(d)
    return {"params": out}


def load_space(path) -> SearchSpace:
    """Read and parse a space config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_space(fh.read())
