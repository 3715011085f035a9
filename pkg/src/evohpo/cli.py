"""Command line interface.

Subcommands: ``run`` (study matrix for one mode), ``final-eval``
(repeated evaluation of one setting), ``ttest`` (two-sample statistic
from summary stats), ``export`` (re-export trend series from persisted
studies), ``resume`` (continue an interrupted study). All randomness is
controlled by ``--seed``/``--seeds`` plus derived streams.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    ResultSummary,
    export_trends,
    final_eval,
    load_study,
    make_evaluator,
    resume_from_dir,
    run_experiment,
    t_statistic,
)
from .space import Setting, load_space


def _parse_seeds(text: str) -> list:
    try:
        return [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise SystemExit(f"invalid --seeds value {text!r} (expected e.g. 1,2,3)")


def _parse_group(text: str) -> ResultSummary:
    parts = text.split(":")
    if len(parts) != 4:
        raise SystemExit(f"invalid group {text!r} (expected LABEL:MEAN:STD:N)")
    label, mean, std, n = parts
    return ResultSummary(label=label, n=int(n), mean_rmse=float(mean), std=float(std))


def _cmd_run(args) -> int:
    result = run_experiment(
        space=args.space,
        mode=args.mode,
        evaluator_spec=args.evaluator,
        trials=args.trials,
        repeats=args.repeats,
        seeds=_parse_seeds(args.seeds),
        out_dir=args.out,
        noise_free=args.noise_free,
        sigma0=args.sigma0,
        workers=args.workers,
    )
    print(result.summary_path.read_text(), end="")
    for seed, message in sorted(result.failures.items()):
        print(f"seed {seed} failed: {message}", file=sys.stderr)
    return 1 if result.failures else 0


def _cmd_final_eval(args) -> int:
    if args.setting == "-":
        setting = Setting(json.load(sys.stdin))
    else:
        with open(args.setting, "r", encoding="utf-8") as fh:
            setting = Setting(json.load(fh))
    if args.space:
        load_space(args.space).validate_setting(setting, allow_sentinel=True)
    evaluator = make_evaluator(args.evaluator, noise_free=args.noise_free)
    try:
        summary = final_eval(setting, evaluator, n=args.n, seed=args.seed, label=args.label)
    finally:
        if hasattr(evaluator, "close"):
            evaluator.close()
    record = {
        "label": summary.label,
        "n": summary.n,
        "mean_rmse": summary.mean_rmse,
        "std": summary.std,
        "scores": list(summary.scores),
        "setting": setting.as_dict(),
    }
    text = json.dumps(record, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_ttest(args) -> int:
    result = t_statistic(_parse_group(args.a), _parse_group(args.b))
    print(f"t({result.groups[0]} vs {result.groups[1]}, n={result.n}) = {result.t_value:.4f}")
    return 0


def _cmd_export(args) -> int:
    studies = [load_study(d) for d in args.study]
    for path in export_trends(studies, args.out):
        print(path)
    return 0


def _cmd_resume(args) -> int:
    evaluator = make_evaluator(args.evaluator, noise_free=args.noise_free)
    try:
        study = resume_from_dir(args.study, evaluator, workers=args.workers)
    finally:
        if hasattr(evaluator, "close"):
            evaluator.close()
    if study.best is None:
        print(f"{args.study}: {len(study.trials)} trials, no best")
    else:
        setting, score = study.best
        print(f"{args.study}: {len(study.trials)} trials, best {score!r} at {setting.as_dict()}")
    return 0


def _add_evaluator_flags(parser) -> None:
    parser.add_argument(
        "--evaluator",
        default="surrogate",
        help="surrogate | analytic:NAME:DIM | external:CMD",
    )
    parser.add_argument(
        "--noise-free", action="store_true", help="disable surrogate noise"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evohpo",
        description="CMA-ES hyperparameter optimization over pseudo-dynamic spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one mode of the experiment matrix")
    p.add_argument("--space", required=True, help="space config file")
    p.add_argument("--mode", required=True, choices=["graph", "task", "both"])
    _add_evaluator_flags(p)
    p.add_argument("--trials", type=int, default=200, help="trial budget per study")
    p.add_argument("--repeats", type=int, default=3, help="evaluations per trial")
    p.add_argument("--seeds", default="1", help="comma-separated study seeds")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--sigma0", type=float, default=0.3)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("final-eval", help="repeatedly evaluate one setting")
    p.add_argument("--setting", required=True, help="JSON setting file, or - for stdin")
    p.add_argument("--space", help="optional space file to validate against")
    _add_evaluator_flags(p)
    p.add_argument("-n", type=int, default=30, help="number of evaluations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--label", default="final")
    p.add_argument("--out", help="write the JSON summary here as well")
    p.set_defaults(func=_cmd_final_eval)

    p = sub.add_parser("ttest", help="two-sample t statistic from summary stats")
    p.add_argument("--a", required=True, help="LABEL:MEAN:STD:N")
    p.add_argument("--b", required=True, help="LABEL:MEAN:STD:N")
    p.set_defaults(func=_cmd_ttest)

    p = sub.add_parser("export", help="re-export trend series from study dirs")
    p.add_argument("--study", nargs="+", required=True, help="study directories")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("resume", help="continue an interrupted study")
    p.add_argument("--study", required=True, help="study directory")
    _add_evaluator_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_resume)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
