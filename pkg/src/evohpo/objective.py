"""Evaluators: analytic benchmarks, the surrogate trainer, external processes.

An evaluator scores one setting for one (trial, repeat, seed) triple;
lower is better. Three families ship here:

* ``analytic`` -- classic benchmark functions over continuous spaces,
  used to validate the optimizer itself;
* ``surrogate`` -- a deterministic stand-in for training a GNN on the
  bundled space, calibrated to the RMSE scale of the stock baseline and
  to reward tuning both architecture groups more than either alone;
* ``external`` -- a client for an evaluator child process speaking a
  line-delimited JSON protocol over stdin/stdout, the seam where a real
  trainer attaches.
"""

from __future__ import annotations

import json
import math
import numbers
import shlex
import subprocess
import threading
from dataclasses import dataclass, field
from queue import Empty, Queue
from typing import Mapping, Optional, Sequence

import numpy as np

from .presets import gnn_space
from .prng import seeded_normal
from .space import Continuous, ParamSpec, SearchSpace, Setting

__all__ = [
    "EvaluationError",
    "ProtocolError",
    "EvaluationTimeout",
    "Evaluator",
    "sphere",
    "rosenbrock",
    "rastrigin",
    "AnalyticEvaluator",
    "analytic",
    "SurrogateParams",
    "SurrogateEvaluator",
    "surrogate",
    "ExternalEvaluator",
    "external",
]

PROTOCOL_VERSION = 1


class EvaluationError(RuntimeError):
    """An evaluation attempt failed; carries the offending trial/repeat."""

    def __init__(self, message: str, trial: Optional[int] = None, repeat: Optional[int] = None):
        if trial is not None:
            message = f"{message} (trial={trial}, repeat={repeat})"
        super().__init__(message)
        self.trial = trial
        self.repeat = repeat


class ProtocolError(EvaluationError):
    """The child process sent something that is not a valid response."""


class EvaluationTimeout(EvaluationError):
    """The child process did not answer within the allotted time."""


class Evaluator:
    """Scoring interface; subclasses set the capability flags honestly.

    ``deterministic`` promises identical scores for identical
    ``(setting, seed)``; ``concurrency_safe`` permits concurrent
    ``evaluate`` calls from multiple threads.
    """

    concurrency_safe = False
    deterministic = False

    def evaluate(self, setting: Setting, trial: int, repeat: int, seed: int) -> float:
        raise NotImplementedError


def sphere(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x @ x)


def rosenbrock(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x + 10.0 - 10.0 * np.cos(2.0 * math.pi * x)))


_ANALYTIC = {"sphere": sphere, "rosenbrock": rosenbrock, "rastrigin": rastrigin}


class AnalyticEvaluator(Evaluator):
    """Benchmark function over an all-continuous space.

    Settings are vectorized by stacking their scalar values in key order;
    the global minimum is 0 (at the origin, or all-ones for rosenbrock).
    With ``dim=None`` the dimension locks on the first evaluated setting.
    """

    concurrency_safe = True
    deterministic = True

    def __init__(self, name: str, dim: Optional[int] = None, lo: float = -5.0, hi: float = 5.0):
        if name not in _ANALYTIC:
            raise ValueError(f"unknown analytic function {name!r} (use {sorted(_ANALYTIC)})")
        self._min_dim = 2 if name == "rosenbrock" else 1
        if dim is not None and dim < self._min_dim:
            raise ValueError(f"{name} needs dim >= {self._min_dim}, got {dim}")
        self.name = name
        self.dim = dim
        self.func = _ANALYTIC[name]
        self._bounds = (lo, hi)

    @property
    def space(self) -> SearchSpace:
        if self.dim is None:
            raise ValueError("dimension not known yet (no setting evaluated)")
        lo, hi = self._bounds
        return SearchSpace(
            [ParamSpec(f"x{i + 1}", Continuous(lo, hi)) for i in range(self.dim)]
        )

    def _vectorize(self, setting: Mapping) -> np.ndarray:
        vals: list[float] = []
        for name, v in setting.items():
            if isinstance(v, (list, tuple)):
                vals.extend(float(e) for e in v)
            elif isinstance(v, numbers.Real) and not isinstance(v, bool):
                vals.append(float(v))
            else:
                raise EvaluationError(
                    f"setting value {name}={v!r} is not a real scalar"
                )
        if self.dim is None:
            if len(vals) < self._min_dim:
                raise EvaluationError(
                    f"setting has {len(vals)} scalars, {self.name} needs >= {self._min_dim}"
                )
            self.dim = len(vals)
        if len(vals) != self.dim:
            raise EvaluationError(
                f"setting has {len(vals)} scalars, {self.name} expects {self.dim}"
            )
        return np.asarray(vals)

    def evaluate(self, setting, trial, repeat, seed) -> float:
        return self.func(self._vectorize(setting))


def analytic(name: str, dim: int) -> AnalyticEvaluator:
    """Benchmark evaluator with known global minimum 0."""
    if dim is None or dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return AnalyticEvaluator(name, dim)


def _frozen_penalties() -> Mapping[str, float]:
    return {"relu": 0.0, "tanh": 0.05, "sigmoid": 0.10}


@dataclass(frozen=True)
class SurrogateParams:
    """Weights of the surrogate training-cost model.

    The noise-free score is minimized (exactly ``floor``) at three graph
    layers of width 512 with a 1024 dense embedding, four task layers of
    width 1024, and relu. Leaving the task side at the stock "output layer
    only" baseline costs ``no_hidden_penalty``, which dominates what graph
    tuning alone can recover -- so tuning both groups beats tuning either,
    and task-only beats graph-only.
    """

    floor: float = 0.60
    graph_depth_weight: float = 0.15
    graph_width_weight: float = 0.10
    dense_weight: float = 0.05
    task_depth_weight: float = 0.15
    task_width_weight: float = 0.05
    activation_penalty: Mapping[str, float] = field(default_factory=_frozen_penalties)
    no_hidden_penalty: float = 0.25
    noise_sd: float = 0.03

    def __post_init__(self):
        for name in (
            "floor",
            "graph_depth_weight",
            "graph_width_weight",
            "dense_weight",
            "task_depth_weight",
            "task_width_weight",
            "no_hidden_penalty",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if any(v < 0 for v in self.activation_penalty.values()):
            raise ValueError("activation penalties must be >= 0")


class SurrogateEvaluator(Evaluator):
    """Deterministic stand-in for GNN training over the bundled space.

    score = floor
          + graph_depth_weight * |n_g - 3| / 5
          + graph_width_weight * (1 - mean(s_g) / 512)
          + dense_weight       * (1 - s_d / 1024)
          + task term
          + noise

    where the task term is ``no_hidden_penalty`` for the ``n_f = 0``
    sentinel and otherwise
    ``task_depth_weight * |n_f - 4| / 5 + task_width_weight *
    (1 - mean(s_f) / 1024) + activation_penalty[a]``.

    Noise is ``noise_sd`` times a standard-normal draw reproducible from
    the seed alone (xorshift64* stream seeded through splitmix64,
    Box-Muller first variate -- see ``evohpo.prng``), so any external
    reimplementation can match scores bit-for-bit minus libm rounding.
    """

    concurrency_safe = True
    deterministic = True

    def __init__(
        self,
        params: Optional[SurrogateParams] = None,
        noise_free: bool = False,
        space: Optional[SearchSpace] = None,
    ):
        self.params = params or SurrogateParams()
        self.noise_free = noise_free
        self.space = space or gnn_space()

    def evaluate(self, setting, trial, repeat, seed) -> float:
        self.space.validate_setting(setting, allow_sentinel=True)
        p = self.params
        n_g, s_g, s_d = setting["n_g"], setting["s_g"], setting["s_d"]
        n_f, s_f, a = setting["n_f"], setting["s_f"], setting["a"]
        score = (
            p.floor
            + p.graph_depth_weight * abs(n_g - 3) / 5.0
            + p.graph_width_weight * (1.0 - (sum(s_g) / len(s_g)) / 512.0)
            + p.dense_weight * (1.0 - s_d / 1024.0)
        )
        if n_f == 0:
            score += p.no_hidden_penalty
        else:
            if a is None:
                raise EvaluationError("activation required when n_f >= 1", trial, repeat)
            score += (
                p.task_depth_weight * abs(n_f - 4) / 5.0
                + p.task_width_weight * (1.0 - (sum(s_f) / len(s_f)) / 1024.0)
                + p.activation_penalty[a]
            )
        if not self.noise_free and p.noise_sd > 0.0:
            score += p.noise_sd * seeded_normal(seed)
        return score


def surrogate(params: Optional[SurrogateParams] = None, noise_free: bool = False) -> SurrogateEvaluator:
    """Surrogate evaluator over the bundled GNN space."""
    return SurrogateEvaluator(params=params, noise_free=noise_free)


class _Child:
    """One evaluator child process plus a line-reader thread."""

    def __init__(self, argv: Sequence[str], timeout: float):
        self.proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self.lines: Queue = Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        line = self._next_line(timeout)
        try:
            hello = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolError(f"bad handshake line: {line!r}") from None
        if hello.get("type") != "ready" or hello.get("protocol") != PROTOCOL_VERSION:
            raise ProtocolError(f"unexpected handshake: {line!r}")

    def _pump(self) -> None:
        for line in self.proc.stdout:
            self.lines.put(line)
        self.lines.put(None)  # EOF marker

    def _next_line(self, timeout: float) -> str:
        try:
            line = self.lines.get(timeout=timeout)
        except Empty:
            raise EvaluationTimeout(f"no response within {timeout}s") from None
        if line is None:
            code = self.proc.wait()
            raise BrokenPipeError(f"evaluator process exited with code {code}")
        return line

    def request(self, obj: dict, timeout: float) -> dict:
        payload = json.dumps(obj)
        self.proc.stdin.write(payload + "\n")
        self.proc.stdin.flush()
        line = self._next_line(timeout)
        try:
            resp = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolError(f"malformed response line: {line!r}") from None
        if not isinstance(resp, dict):
            raise ProtocolError(f"malformed response line: {line!r}")
        return resp

    def close(self) -> None:
        try:
            if self.proc.stdin:
                self.proc.stdin.close()
            self.proc.wait(timeout=5)
        except Exception:
            self.proc.kill()
            self.proc.wait()


class ExternalEvaluator(Evaluator):
    """Client for a child process speaking the evaluation wire protocol.

    Per call: one request line out, one response line back. The child is
    started lazily, reused across calls, and restarted once per call if it
    crashes; a timed-out child is killed so the next call starts fresh.

    Wire protocol (one JSON object per line):
      child -> ``{"type": "ready", "protocol": 1}`` once on startup
      parent -> ``{"type": "eval", "trial": t, "repeat": r, "seed": s,
      "setting": {...}}``
      child -> ``{"type": "score", "value": v}`` or
      ``{"type": "error", "message": m}``
    Scores travel as decimals with 17 significant digits so they parse
    back bit-exactly.
    """

    def __init__(self, command, timeout: float = 30.0, deterministic: bool = False):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise ValueError("empty evaluator command")
        self.timeout = float(timeout)
        self.deterministic = deterministic
        self._child: Optional[_Child] = None

    def _ensure_child(self) -> _Child:
        if self._child is None:
            self._child = _Child(self.argv, self.timeout)
        return self._child

    def evaluate(self, setting, trial, repeat, seed) -> float:
        request = {
            "type": "eval",
            "trial": int(trial),
            "repeat": int(repeat),
            "seed": int(seed),
            "setting": setting.as_dict() if isinstance(setting, Setting) else dict(setting),
        }
        last_exit = None
        for _ in range(2):  # fresh start, then one restart after a crash
            try:
                # a command that cannot spawn at all raises straight through
                child = self._ensure_child()
                resp = child.request(request, self.timeout)
            except BrokenPipeError as exc:
                last_exit = exc
                self._drop_child()
                continue
            except EvaluationTimeout as exc:
                self._drop_child()
                raise EvaluationTimeout(str(exc), trial, repeat) from None
            except ProtocolError as exc:
                raise ProtocolError(str(exc), trial, repeat) from None
            kind = resp.get("type")
            if kind == "score" and isinstance(resp.get("value"), numbers.Real):
                return float(resp["value"])
            if kind == "error":
                raise EvaluationError(
                    f"evaluator reported: {resp.get('message')!r}", trial, repeat
                )
            raise ProtocolError(f"unexpected response {resp!r}", trial, repeat)
        raise EvaluationError(
            f"evaluator process kept crashing ({last_exit})", trial, repeat
        )

    def _drop_child(self) -> None:
        if self._child is not None:
            self._child.close()
            self._child = None

    def close(self) -> None:
        self._drop_child()

    def __enter__(self) -> "ExternalEvaluator":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def external(command, timeout: float = 30.0, deterministic: bool = False) -> ExternalEvaluator:
    """External-process evaluator speaking the wire protocol."""
    return ExternalEvaluator(command, timeout=timeout, deterministic=deterministic)
