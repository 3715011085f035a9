"""evohpo: CMA-ES hyperparameter optimization over pseudo-dynamic spaces.

A search space with conditionally sized list parameters flattens to a
fixed set of [0, 1] axes, a seedable CMA-ES proposes points on those
axes, and a study driver turns candidates into trials (decode, mask
injection, repeated evaluation). The bench layer runs the graph/task/both
ablation matrix, persists studies, and computes summary statistics.
"""

from .bench import (
    ExperimentResult,
    ResultSummary,
    TTestResult,
    export_trends,
    final_eval,
    load_study,
    make_evaluator,
    read_trend,
    resume_from_dir,
    run_experiment,
    t_statistic,
)
from .cmaes import Candidate, CmaEs, CmaParams, EigenError, eigendecompose
from .driver import (
    MaskError,
    Study,
    StudyConfig,
    Trial,
    best_so_far,
    mask_for_mode,
    resume_study,
    run_study,
    validate_mask,
)
from .objective import (
    AnalyticEvaluator,
    EvaluationError,
    EvaluationTimeout,
    Evaluator,
    ExternalEvaluator,
    ProtocolError,
    SurrogateEvaluator,
    SurrogateParams,
    analytic,
    external,
    rastrigin,
    rosenbrock,
    sphere,
    surrogate,
)
from .presets import GRAPH_GROUP, TASK_GROUP, baseline_setting, gnn_space
from .prng import Xorshift64Star, derive_seed, mix64, seeded_normal
from .space import (
    Axis,
    Categorical,
    Continuous,
    ParamSpec,
    SearchSpace,
    Setting,
    SpaceError,
    SteppedInt,
    load_space,
    parse_space,
)

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "AnalyticEvaluator",
    "Candidate",
    "Categorical",
    "CmaEs",
    "CmaParams",
    "Continuous",
    "EigenError",
    "EvaluationError",
    "EvaluationTimeout",
    "Evaluator",
    "ExperimentResult",
    "ExternalEvaluator",
    "GRAPH_GROUP",
    "MaskError",
    "ParamSpec",
    "ProtocolError",
    "ResultSummary",
    "SearchSpace",
    "Setting",
    "SpaceError",
    "SteppedInt",
    "Study",
    "StudyConfig",
    "SurrogateEvaluator",
    "SurrogateParams",
    "TASK_GROUP",
    "TTestResult",
    "Trial",
    "Xorshift64Star",
    "analytic",
    "baseline_setting",
    "best_so_far",
    "derive_seed",
    "eigendecompose",
    "export_trends",
    "external",
    "final_eval",
    "gnn_space",
    "load_space",
    "load_study",
    "make_evaluator",
    "mask_for_mode",
    "mix64",
    "parse_space",
    "rastrigin",
    "read_trend",
    "resume_from_dir",
    "resume_study",
    "rosenbrock",
    "run_experiment",
    "run_study",
    "seeded_normal",
    "sphere",
    "surrogate",
    "t_statistic",
    "validate_mask",
]
