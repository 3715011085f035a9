"""Experiment harness: run the ablation matrix, persist studies, score
best settings with repeated final evaluations, and compute two-sample
t statistics from summary stats.

On-disk layout of an experiment (one study per seed):

    out_dir/
      summary.txt                   cross-seed overview
      trend_<mode>_<seed>.csv       per-trial score + running best
      <mode>_seed<seed>/
        config.json                 study config snapshot (incl. space)
        trials.jsonl                append-only trial log
        cma_state.txt               latest optimizer snapshot
        best.json                   best setting + score

Floats in exported series are written with 17 significant digits, which
round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .driver import (
    MODES,
    Study,
    StudyConfig,
    best_so_far,
    mask_for_mode,
    resume_study,
    run_study,
    trial_from_record,
    trial_to_record,
)
from .objective import (
    AnalyticEvaluator,
    EvaluationError,
    Evaluator,
    analytic,
    external,
    surrogate,
)
from .presets import baseline_setting
from .prng import derive_seed
from .space import SearchSpace, Setting, load_space, space_from_dict, space_to_dict

__all__ = [
    "ResultSummary",
    "TTestResult",
    "final_eval",
    "t_statistic",
    "make_evaluator",
    "run_experiment",
    "resume_from_dir",
    "load_study",
    "export_trends",
    "read_trend",
    "ExperimentResult",
]


def _g17(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ResultSummary:
    """Mean/std of n repeated evaluations of one setting."""

    label: str
    n: int
    mean_rmse: float
    std: float
    scores: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.std < 0:
            raise ValueError(f"std must be >= 0, got {self.std}")
        if self.scores and len(self.scores) != self.n:
            raise ValueError("scores length must equal n")


@dataclass(frozen=True)
class TTestResult:
    t_value: float
    n: int
    groups: tuple


def final_eval(
    setting: Setting,
    evaluator: Evaluator,
    n: int = 30,
    seed: int = 0,
    label: str = "final",
) -> ResultSummary:
    """Evaluate one setting n times with distinct derived seeds.

    Repeat i uses ``derive_seed(seed, 0, i)`` (trial slot 0 is reserved
    for final evaluations). Returns mean and sample (n-1) standard
    deviation; on evaluator failure raises with ``partial_scores``
    attached so completed repeats are not lost.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    scores: list = []
    for i in range(1, n + 1):
        try:
            scores.append(float(evaluator.evaluate(setting, 0, i, derive_seed(seed, 0, i))))
        except EvaluationError as exc:
            exc.partial_scores = tuple(scores)
            raise
    return ResultSummary(
        label=label,
        n=n,
        mean_rmse=math.fsum(scores) / n,
        std=statistics.stdev(scores),
        scores=tuple(scores),
    )


def t_statistic(a: ResultSummary, b: ResultSummary) -> TTestResult:
    """Equal-n two-sample t statistic from summary stats:
    ``t = (mean_a - mean_b) / sqrt((std_a^2 + std_b^2) / n)``.

    Antisymmetric in its arguments; undefined (raises) when both stds are
    zero.
    """
    if a.n != b.n:
        raise ValueError(f"group sizes differ: {a.n} != {b.n}")
    if a.std == 0.0 and b.std == 0.0:
        raise ValueError("t statistic undefined: both standard deviations are zero")
    t = (a.mean_rmse - b.mean_rmse) / math.sqrt((a.std**2 + b.std**2) / a.n)
    return TTestResult(t_value=t, n=a.n, groups=(a.label, b.label))


def make_evaluator(spec: str, noise_free: bool = False, timeout: float = 30.0) -> Evaluator:
    """Build an evaluator from its CLI spec string.

    ``surrogate`` | ``analytic:NAME[:DIM]`` | ``external:CMD``. Without
    an explicit DIM the analytic dimension locks on first use.
    """
    if spec == "surrogate":
        return surrogate(noise_free=noise_free)
    if spec.startswith("analytic:"):
        parts = spec.split(":")
        if len(parts) == 2:
            return AnalyticEvaluator(parts[1])
        if len(parts) == 3:
            return analytic(parts[1], int(parts[2]))
        raise ValueError(f"analytic evaluator spec must be analytic:NAME[:DIM], got {spec!r}")
    if spec.startswith("external:"):
        return external(spec.split(":", 1)[1], timeout=timeout)
    raise ValueError(f"unknown evaluator spec {spec!r}")


@dataclass
class ExperimentResult:
    out_dir: Path
    studies: dict  # seed -> Study
    failures: dict  # seed -> error message
    summary_path: Path


def _config_record(config: StudyConfig) -> dict:
    return {
        "space": space_to_dict(config.space),
        "budget": config.budget,
        "repeats": config.repeats,
        "seed": config.seed,
        "mask": dict(config.mask),
        "cma_overrides": config.cma_overrides,
        "sigma0": config.sigma0,
        "label": config.label,
    }


def _config_from_record(record: dict) -> StudyConfig:
    return StudyConfig(
        space=space_from_dict(record["space"]),
        budget=int(record["budget"]),
        repeats=int(record["repeats"]),
        seed=int(record["seed"]),
        mask=dict(record["mask"]),
        cma_overrides=record.get("cma_overrides"),
        sigma0=float(record.get("sigma0", 0.3)),
        label=record.get("label", "study"),
    )


def _write_study_outputs(study_dir: Path, study: Study) -> None:
    best = study.best
    with open(study_dir / "best.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "best_setting": best[0].as_dict() if best else None,
                "best_mean_score": best[1] if best else None,
                "trials": len(study.trials),
            },
            fh,
            indent=2,
        )
        fh.write("\n")


def _run_one_study(
    config: StudyConfig, evaluator: Evaluator, study_dir: Path, workers: int
) -> Study:
    study_dir.mkdir(parents=True, exist_ok=True)
    with open(study_dir / "config.json", "w", encoding="utf-8") as fh:
        json.dump(_config_record(config), fh, indent=2)
        fh.write("\n")
    log_path = study_dir / "trials.jsonl"
    state_path = study_dir / "cma_state.txt"
    with open(log_path, "w", encoding="utf-8") as log:

        def trial_sink(trial):
            log.write(json.dumps(trial_to_record(trial)) + "\n")
            log.flush()

        def state_sink(text):
            state_path.write_text(text + "\n", encoding="utf-8")

        study = run_study(
            config, evaluator, trial_sink=trial_sink, state_sink=state_sink, workers=workers
        )
    _write_study_outputs(study_dir, study)
    return study


def run_experiment(
    space,
    mode: str,
    evaluator_spec: str,
    trials: int,
    repeats: int,
    seeds: Sequence[int],
    out_dir,
    noise_free: bool = False,
    sigma0: float = 0.3,
    defaults: Optional[Setting] = None,
    cma_overrides: Optional[dict] = None,
    workers: int = 1,
) -> ExperimentResult:
    """One study per seed for a given mode, fully persisted.

    ``space`` is a SearchSpace or a config file path. A failing seed is
    recorded and the remaining seeds still run. Evaluators are constructed
    per seed (external evaluators get one child process per study).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r} (use graph|task|both)")
    if not isinstance(space, SearchSpace):
        space = load_space(space)
    defaults = defaults if defaults is not None else baseline_setting()
    mask = mask_for_mode(space, mode, defaults)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    studies: dict = {}
    failures: dict = {}
    for seed in seeds:
        config = StudyConfig(
            space=space,
            budget=trials,
            repeats=repeats,
            seed=seed,
            mask=mask,
            cma_overrides=cma_overrides,
            sigma0=sigma0,
            label=mode,
        )
        evaluator = make_evaluator(evaluator_spec, noise_free=noise_free)
        try:
            study = _run_one_study(config, evaluator, out_dir / f"{mode}_seed{seed}", workers)
            studies[seed] = study
            export_trends([study], out_dir)
        except Exception as exc:  # record and keep going with other seeds
            failures[seed] = f"{type(exc).__name__}: {exc}"
        finally:
            if hasattr(evaluator, "close"):
                evaluator.close()
    summary_path = out_dir / "summary.txt"
    _write_summary(summary_path, mode, evaluator_spec, trials, repeats, studies, failures)
    return ExperimentResult(
        out_dir=out_dir, studies=studies, failures=failures, summary_path=summary_path
    )


def _write_summary(path, mode, evaluator_spec, trials, repeats, studies, failures) -> None:
    lines = [
        f"mode={mode} evaluator={evaluator_spec} trials={trials} repeats={repeats}",
        "",
    ]
    finals = []
    for seed in sorted(studies):
        study = studies[seed]
        if study.best is None:
            lines.append(f"seed {seed}: no best (empty budget)")
            continue
        setting, score = study.best
        finals.append(score)
        lines.append(f"seed {seed}: best {_g17(score)} at {setting.as_dict()}")
    for seed in sorted(failures):
        lines.append(f"seed {seed}: FAILED: {failures[seed]}")
    lines.append("")
    if finals:
        lines.append(f"median final best: {_g17(statistics.median(finals))}")
        lines.append(f"mean final best:   {_g17(math.fsum(finals) / len(finals))}")
    else:
        lines.append("no best values (no completed trials)")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_study(study_dir) -> Study:
    """Rebuild a Study from its persisted config and trial log."""
    study_dir = Path(study_dir)
    with open(study_dir / "config.json", "r", encoding="utf-8") as fh:
        config = _config_from_record(json.load(fh))
    trials = _read_trial_log(study_dir / "trials.jsonl")
    best = None
    for trial in trials:
        if best is None or trial.mean_score < best[1]:
            best = (trial.setting, trial.mean_score)
    return Study(
        config=config,
        dimension=config.subspace().axis_count,
        trials=trials,
        best=best,
    )


def _read_trial_log(path) -> list:
    trials = []
    path = Path(path)
    if not path.exists():
        return trials
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                trials.append(trial_from_record(json.loads(line)))
    return trials


def resume_from_dir(study_dir, evaluator: Evaluator, workers: int = 1) -> Study:
    """Continue an interrupted persisted study in place.

    New trials are appended to trials.jsonl, snapshots keep overwriting
    cma_state.txt, and best.json is rewritten at the end.
    """
    study_dir = Path(study_dir)
    with open(study_dir / "config.json", "r", encoding="utf-8") as fh:
        config = _config_from_record(json.load(fh))
    records = [trial_to_record(t) for t in _read_trial_log(study_dir / "trials.jsonl")]
    state_path = study_dir / "cma_state.txt"
    state_text = state_path.read_text(encoding="utf-8") if state_path.exists() else None
    log_path = study_dir / "trials.jsonl"
    with open(log_path, "a", encoding="utf-8") as log:

        def trial_sink(trial):
            log.write(json.dumps(trial_to_record(trial)) + "\n")
            log.flush()

        def state_sink(text):
            state_path.write_text(text + "\n", encoding="utf-8")

        study = resume_study(
            config,
            evaluator,
            records,
            state_text,
            trial_sink=trial_sink,
            state_sink=state_sink,
            workers=workers,
        )
    _write_study_outputs(study_dir, study)
    return study


def export_trends(studies: Sequence[Study], out_dir) -> list:
    """Write one trend file per study: per-trial mean score next to the
    running best, as ``trend_<label>_<seed>.csv``. Empty studies produce
    a header-only file."""
    if not studies:
        raise ValueError("export_trends needs at least one study")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for study in studies:
        path = out_dir / f"trend_{study.config.label}_{study.config.seed}.csv"
        series = best_so_far(study)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("trial,mean_score,best_so_far\n")
            for trial, (index, best) in zip(study.trials, series):
                fh.write(f"{index},{_g17(trial.mean_score)},{_g17(best)}\n")
        paths.append(path)
    return paths


def read_trend(path) -> list:
    """Parse a trend file back to (trial, mean_score, best_so_far) rows."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "trial,mean_score,best_so_far":
            raise ValueError(f"unexpected trend header {header!r}")
        for line in fh:
            t, mean, best = line.strip().split(",")
            rows.append((int(t), float(mean), float(best)))
    return rows
