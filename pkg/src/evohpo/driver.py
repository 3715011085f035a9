"""Budgeted HPO studies over a pseudo-dynamic space.

The optimizer never sees the conditional structure: it runs over the
flattened axes of the unmasked parameters only, at a dimension that stays
fixed for the whole study. Each candidate becomes one trial: clamp ->
decode (controller-driven truncation) -> inject masked fixed values ->
evaluate ``repeats`` times with derived per-repeat seeds -> mean score.
Candidates are fed back in full generations; when the budget cuts a
generation short, the unevaluated candidates inherit the worst fitness
observed in that generation so the update stays well formed.

Ablation modes mask one architecture group at baseline values while the
other is optimized (``graph`` / ``task``), or optimize everything
(``both``).
"""

from __future__ import annotations

import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .cmaes import CmaEs
from .objective import EvaluationError, Evaluator
from .presets import GRAPH_GROUP, TASK_GROUP
from .prng import derive_seed
from .space import Categorical, SearchSpace, Setting, SteppedInt

__all__ = [
    "MaskError",
    "Trial",
    "StudyConfig",
    "Study",
    "mask_for_mode",
    "validate_mask",
    "run_study",
    "resume_study",
    "best_so_far",
    "trial_to_record",
    "trial_from_record",
]

MODES = ("graph", "task", "both")


class MaskError(ValueError):
    """A fixed-parameter mask is inconsistent with its space."""


@dataclass
class Trial:
    """One evaluated setting. ``flags`` is empty for clean trials; a
    penalized trial carries "penalty" and whatever scores it managed."""

    index: int  # 1-based sequence position
    setting: Setting
    raw_vector: np.ndarray  # optimizer output before clamping
    scores: tuple
    mean_score: float
    wall_time: float
    flags: tuple = ()
    timestamp: float = 0.0


@dataclass
class StudyConfig:
    space: SearchSpace
    budget: int
    repeats: int = 3
    seed: int = 0
    mask: dict = field(default_factory=dict)
    cma_overrides: Optional[dict] = None
    sigma0: float = 0.3
    label: str = "study"

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError(f"budget must be >= 0, got {self.budget}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.sigma0 <= 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")
        validate_mask(self.space, self.mask)

    def subspace(self) -> SearchSpace:
        """The unmasked parameters, i.e. what the optimizer actually sees."""
        return SearchSpace([p for p in self.space.params if p.name not in self.mask])


@dataclass
class Study:
    config: StudyConfig
    dimension: int
    trials: list
    best: Optional[tuple] = None  # (Setting, mean_score)


def validate_mask(space: SearchSpace, mask: dict) -> None:
    """Check mask consistency: known names, domain-valid fixed values, and
    controller/list agreement.

    Sentinels are allowed only here and in defaults: a controller may be
    fixed to 0 when every list it controls is fixed to empty, and a
    categorical may be fixed to None.
    """
    unknown = set(mask) - set(space.names)
    if unknown:
        raise MaskError(f"mask names {sorted(unknown)} not in space")
    for name, value in mask.items():
        p = space[name]
        if p.is_dynamic:
            if p.controller not in mask:
                raise MaskError(
                    f"{name} is masked but its controller {p.controller} is not"
                )
            if not isinstance(value, (list, tuple)):
                raise MaskError(f"{name}: fixed value must be a list, got {value!r}")
            if len(value) != mask[p.controller]:
                raise MaskError(
                    f"{name}: fixed list length {len(value)} != masked controller "
                    f"{p.controller}={mask[p.controller]}"
                )
            for j, v in enumerate(value):
                if not p.domain.contains(v):
                    raise MaskError(f"{name}[{j + 1}]: {v!r} outside {p.domain}")
        else:
            dependents = space.controlled_by(name)
            if dependents:
                for dep in dependents:
                    if dep.name not in mask:
                        raise MaskError(
                            f"controller {name} is masked but {dep.name} is not"
                        )
                if value == 0 and isinstance(p.domain, SteppedInt):
                    continue  # "no layers" sentinel
            if value is None and isinstance(p.domain, Categorical):
                continue  # "switched off" sentinel
            if not p.domain.contains(value):
                raise MaskError(f"{name}: {value!r} outside {p.domain}")


def mask_for_mode(space: SearchSpace, mode: str, defaults: Setting) -> dict:
    """Fixed-parameter mask for an ablation mode.

    graph: optimize the graph group, pin the task group from defaults;
    task: the reverse; both: pin nothing. ``defaults`` must cover every
    parameter the mode fixes.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r} (use graph|task|both)")
    if mode == "both":
        return {}
    fixed = TASK_GROUP if mode == "graph" else GRAPH_GROUP
    mask = {}
    for name in fixed:
        if name not in space:
            raise MaskError(f"space has no parameter {name!r} required by mode {mode!r}")
        if name not in defaults:
            raise MaskError(f"defaults missing {name!r} required by mode {mode!r}")
        mask[name] = defaults[name]
    validate_mask(space, mask)
    return mask


def _merged_setting(space: SearchSpace, partial: Setting, mask: dict) -> Setting:
    """Full setting in space parameter order: decoded values where the
    optimizer controls a parameter, fixed mask values elsewhere."""
    return Setting(
        {p.name: mask[p.name] if p.name in mask else partial[p.name] for p in space.params}
    )


def _penalty_score(mean_scores: Sequence[float]) -> float:
    """Penalty for an unrecoverable trial: worst mean so far plus three
    running standard deviations (1.0 when fewer than 2 trials exist; the
    worst-so-far term is 0.0 when no trial has completed yet)."""
    worst = max(mean_scores) if mean_scores else 0.0
    spread = statistics.stdev(mean_scores) if len(mean_scores) >= 2 else 1.0
    return worst + 3.0 * spread


def _evaluate_repeat(evaluator, setting, trial_idx, r, seed):
    """One repeat with a single retry; returns a finite score or raises."""
    for attempt in (0, 1):
        try:
            score = float(evaluator.evaluate(setting, trial_idx, r, seed))
        except EvaluationError:
            if attempt:
                raise
            continue
        if math.isfinite(score):
            return score
        if attempt:
            raise EvaluationError(
                f"non-finite score {score!r}", trial_idx, r
            )
    raise AssertionError("unreachable")


def run_study(
    config: StudyConfig,
    evaluator: Evaluator,
    *,
    trial_sink: Optional[Callable] = None,
    state_sink: Optional[Callable] = None,
    workers: int = 1,
) -> Study:
    """Run a fresh study for exactly ``config.budget`` trials.

    ``trial_sink(trial)`` is called once per completed trial (append-only
    log) and ``state_sink(text)`` after init and after every generation
    update, enabling exact resume from the persisted pair. With
    ``workers > 1`` and a concurrency-safe evaluator, the repeats of a
    generation are evaluated in a thread pool; results are applied in
    (candidate, repeat) order, so the trajectory matches serial execution.
    """
    sub = config.subspace()
    es = None
    if config.budget > 0:
        es = CmaEs(
            sub.axis_count,
            np.full(sub.axis_count, 0.5),
            config.sigma0,
            config.seed,
            **(config.cma_overrides or {}),
        )
        if state_sink:
            state_sink(es.save_state())
    return _run_loop(
        config, evaluator, sub, es, [], [],
        trial_sink=trial_sink, state_sink=state_sink, workers=workers,
    )


def resume_study(
    config: StudyConfig,
    evaluator: Evaluator,
    records: Sequence[dict],
    state_text: Optional[str],
    *,
    trial_sink: Optional[Callable] = None,
    state_sink: Optional[Callable] = None,
    workers: int = 1,
) -> Study:
    """Continue a study from its persisted trial log and latest snapshot.

    Trials already covered by the snapshot are restored verbatim; logged
    trials past the snapshot (an interrupted generation) are replayed
    against the re-asked candidates without consulting the evaluator, so a
    resumed study is identical to an uninterrupted one.
    """
    trials = [trial_from_record(r) for r in records]
    if state_text is None:
        if trials:
            raise ValueError("trial log without an optimizer snapshot cannot be resumed")
        return run_study(
            config, evaluator,
            trial_sink=trial_sink, state_sink=state_sink, workers=workers,
        )
    es = CmaEs.load_state(state_text)
    covered = min(es.generation * es.params.pop_size, config.budget)
    if len(trials) < covered:
        raise ValueError(
            f"trial log has {len(trials)} records but the snapshot covers {covered}"
        )
    done, pending = trials[:covered], trials[covered:]
    return _run_loop(
        config, evaluator, config.subspace(), es, done, pending,
        trial_sink=trial_sink, state_sink=state_sink, workers=workers,
    )


def _run_loop(
    config: StudyConfig,
    evaluator: Evaluator,
    sub: SearchSpace,
    es: Optional[CmaEs],
    trials: list,
    replay: list,
    *,
    trial_sink: Optional[Callable],
    state_sink: Optional[Callable],
    workers: int,
) -> Study:
    space, mask = config.space, config.mask
    dimension = sub.axis_count
    t = len(trials)
    pool = None
    if workers > 1 and evaluator.concurrency_safe:
        pool = ThreadPoolExecutor(max_workers=workers)
    try:
        while t < config.budget:
            candidates = es.ask()
            n_eval = min(len(candidates), config.budget - t)
            n_replay = min(len(replay), n_eval)
            settings = [
                _merged_setting(space, sub.decode(c.vector), mask)
                for c in candidates[:n_eval]
            ]
            # whole generation in flight at once; results are applied in
            # (candidate, repeat) order below, matching serial execution
            futures = {}
            if pool is not None:
                for k in range(n_replay, n_eval):
                    for r in range(1, config.repeats + 1):
                        futures[(k, r)] = pool.submit(
                            _evaluate_repeat,
                            evaluator,
                            settings[k],
                            t + k + 1,
                            r,
                            derive_seed(config.seed, t + k + 1, r),
                        )
            new_trials = []
            for k in range(n_eval):
                cand = candidates[k]
                t += 1
                if k < n_replay:
                    trial = replay.pop(0)
                    if trial.index != t or trial.setting != settings[k]:
                        raise ValueError(
                            f"trial log disagrees with re-asked candidate at t={t}; "
                            "wrong config/seed for this log?"
                        )
                else:
                    trial = _evaluate_trial(
                        config, evaluator, settings[k], cand.vector, t,
                        [x.mean_score for x in trials + new_trials],
                        {r: futures[(k, r)] for r in range(1, config.repeats + 1)}
                        if pool is not None
                        else None,
                    )
                    if trial_sink:
                        trial_sink(trial)
                cand.fitness = trial.mean_score
                new_trials.append(trial)
            worst = max(c.fitness for c in candidates[:n_eval])
            for cand in candidates[n_eval:]:
                cand.fitness = worst
            es.tell(candidates)
            if state_sink:
                state_sink(es.save_state())
            trials.extend(new_trials)
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    best = None
    for trial in trials:
        if best is None or trial.mean_score < best[1]:
            best = (trial.setting, trial.mean_score)
    return Study(config=config, dimension=dimension, trials=trials, best=best)


def _evaluate_trial(
    config: StudyConfig,
    evaluator: Evaluator,
    setting: Setting,
    raw_vector: np.ndarray,
    trial_idx: int,
    prior_means: list,
    futures: Optional[dict],
) -> Trial:
    started = time.perf_counter()
    scores: list = []
    failed = False
    if futures is not None:
        for r in range(1, config.repeats + 1):
            try:
                scores.append(futures[r].result())
            except EvaluationError:
                failed = True
    else:
        for r in range(1, config.repeats + 1):
            seed = derive_seed(config.seed, trial_idx, r)
            try:
                scores.append(_evaluate_repeat(evaluator, setting, trial_idx, r, seed))
            except EvaluationError:
                failed = True
                break
    if failed:
        mean = _penalty_score(prior_means)
        flags: tuple = ("penalty",)
    else:
        mean = math.fsum(scores) / len(scores)
        flags = ()
    return Trial(
        index=trial_idx,
        setting=setting,
        raw_vector=np.array(raw_vector, dtype=float),
        scores=tuple(scores),
        mean_score=mean,
        wall_time=time.perf_counter() - started,
        flags=flags,
        timestamp=time.time(),
    )


def best_so_far(study: Study) -> list:
    """Running minimum of mean scores: one (trial index, best) pair per
    trial, nonincreasing in the second component."""
    out = []
    best = math.inf
    for trial in study.trials:
        best = min(best, trial.mean_score)
        out.append((trial.index, best))
    return out


def trial_to_record(trial: Trial) -> dict:
    """JSON-able trial log record."""
    return {
        "t": trial.index,
        "setting": trial.setting.as_dict(),
        "raw_vector": [float(v) for v in trial.raw_vector],
        "scores": list(trial.scores),
        "mean_score": trial.mean_score,
        "wall_time": trial.wall_time,
        "flags": list(trial.flags),
        "timestamp": trial.timestamp,
    }


def trial_from_record(record: dict) -> Trial:
    return Trial(
        index=int(record["t"]),
        setting=Setting(record["setting"]),
        raw_vector=np.asarray(record["raw_vector"], dtype=float),
        scores=tuple(float(s) for s in record["scores"]),
        mean_score=float(record["mean_score"]),
        wall_time=float(record.get("wall_time", 0.0)),
        flags=tuple(record.get("flags", ())),
        timestamp=float(record.get("timestamp", 0.0)),
    )
