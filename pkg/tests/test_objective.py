import itertools
import math
import sys
from pathlib import Path

import numpy as np
import pytest

from evohpo.objective import (
    EvaluationError,
    EvaluationTimeout,
    ProtocolError,
    SurrogateParams,
    analytic,
    external,
    rastrigin,
    rosenbrock,
    sphere,
    surrogate,
)
from evohpo.presets import baseline_setting, gnn_space
from evohpo.space import Setting, SpaceError

CHILD = [sys.executable, str(Path(__file__).parent / "childeval.py")]

OPTIMUM = Setting(
    {"n_g": 3, "s_g": [512] * 3, "s_d": 1024, "n_f": 4, "s_f": [1024] * 4, "a": "relu"}
)


# ---------------------------------------------------------------- analytic


def test_analytic_minima():
    assert sphere(np.zeros(4)) == 0.0
    assert rosenbrock(np.ones(5)) == 0.0
    assert rastrigin(np.zeros(3)) == 0.0
    assert rastrigin([0.5, 0.5]) == pytest.approx(40.5, abs=1e-12)


def test_analytic_evaluator_on_settings():
    ev = analytic("sphere", 3)
    assert ev.deterministic and ev.concurrency_safe
    assert ev.evaluate(Setting({"x1": 0.0, "x2": 0.0, "x3": 0.0}), 1, 1, 0) == 0.0
    assert ev.evaluate(Setting({"x1": 1.0, "x2": 2.0, "x3": 2.0}), 1, 1, 0) == 9.0
    lists = Setting({"v": [1.0, 2.0], "w": 2.0})  # lists flatten in order
    assert ev.evaluate(lists, 1, 1, 0) == 9.0


def test_analytic_evaluator_errors():
    with pytest.raises(ValueError, match="unknown"):
        analytic("ackley", 3)
    with pytest.raises(ValueError, match="rosenbrock"):
        analytic("rosenbrock", 1)
    ev = analytic("sphere", 2)
    with pytest.raises(EvaluationError, match="scalars"):
        ev.evaluate(Setting({"x1": 0.0}), 1, 1, 0)
    with pytest.raises(EvaluationError, match="real"):
        ev.evaluate(Setting({"x1": 0.0, "x2": "relu"}), 1, 1, 0)


# ---------------------------------------------------------------- surrogate


def test_surrogate_designed_optimum_is_exact_floor():
    ev = surrogate(noise_free=True)
    assert ev.evaluate(OPTIMUM, 1, 1, 0) == 0.60


def test_surrogate_baseline_matches_hand_computation():
    # 0.60 + 0.15*(1/5) + 0.10*(1 - 128/512) + 0.05*(1 - 256/1024) + 0.25
    ev = surrogate(noise_free=True)
    assert ev.evaluate(baseline_setting(), 1, 1, 0) == pytest.approx(0.9925, abs=1e-12)


def test_surrogate_noise_is_seed_deterministic():
    ev = surrogate()
    a = ev.evaluate(OPTIMUM, 1, 1, 12345)
    b = ev.evaluate(OPTIMUM, 7, 2, 12345)  # trial/repeat do not enter the score
    assert a == b
    c = ev.evaluate(OPTIMUM, 1, 1, 12346)
    assert a != c


def test_surrogate_noise_statistics():
    ev = surrogate()
    base = surrogate(noise_free=True).evaluate(OPTIMUM, 1, 1, 0)
    scores = np.array([ev.evaluate(OPTIMUM, 1, 1, s) for s in range(10_000)])
    sd = ev.params.noise_sd
    assert abs(scores.mean() - base) < 4.0 * sd / 100.0
    assert abs(scores.std() - sd) < 0.15 * sd


def test_surrogate_activation_ordering():
    ev = surrogate(noise_free=True)
    scores = {}
    for act in ("relu", "tanh", "sigmoid"):
        setting = Setting(dict(OPTIMUM.as_dict(), a=act))
        scores[act] = ev.evaluate(setting, 1, 1, 0)
    assert scores["relu"] < scores["tanh"] < scores["sigmoid"]


def test_surrogate_rejects_out_of_space_settings():
    ev = surrogate(noise_free=True)
    bad = Setting(dict(OPTIMUM.as_dict(), s_d=100))  # off the 64 grid
    with pytest.raises(SpaceError):
        ev.evaluate(bad, 1, 1, 0)
    with pytest.raises(EvaluationError, match="activation"):
        ev.evaluate(Setting(dict(OPTIMUM.as_dict(), a=None)), 1, 1, 0)


def test_surrogate_graph_minimizer_independent_of_task_side():
    # brute force over a coarsened grid: the graph-side minimizer never moves
    ev = surrogate(noise_free=True)
    widths = (32, 256, 512)
    denses = (64, 512, 1024)
    task_variants = [
        {"n_f": 0, "s_f": [], "a": None},
        {"n_f": 1, "s_f": [64], "a": "sigmoid"},
        {"n_f": 4, "s_f": [1024] * 4, "a": "relu"},
        {"n_f": 6, "s_f": [512] * 6, "a": "tanh"},
    ]
    for task in task_variants:
        best, best_graph = math.inf, None
        for n_g in range(1, 7):
            for s_g in itertools.product(widths, repeat=n_g):
                for s_d in denses:
                    setting = Setting({"n_g": n_g, "s_g": list(s_g), "s_d": s_d, **task})
                    score = ev.evaluate(setting, 1, 1, 0)
                    if score < best:
                        best, best_graph = score, (n_g, s_g, s_d)
        assert best_graph == (3, (512, 512, 512), 1024)


def test_surrogate_task_minimizer_independent_of_graph_side():
    ev = surrogate(noise_free=True)
    widths = (64, 512, 1024)
    graph_variants = [
        {"n_g": 1, "s_g": [32], "s_d": 64},
        {"n_g": 3, "s_g": [512] * 3, "s_d": 1024},
        {"n_g": 6, "s_g": [256] * 6, "s_d": 512},
    ]
    for graph in graph_variants:
        best, best_task = math.inf, None
        for n_f in range(1, 7):
            for s_f in itertools.product(widths, repeat=n_f):
                for act in ("sigmoid", "relu", "tanh"):
                    setting = Setting({**graph, "n_f": n_f, "s_f": list(s_f), "a": act})
                    score = ev.evaluate(setting, 1, 1, 0)
                    if score < best:
                        best, best_task = score, (n_f, s_f, act)
        assert best_task == (4, (1024, 1024, 1024, 1024), "relu")


def test_surrogate_unique_global_minimum_on_full_grid_sample():
    # every deviation from the designed optimum strictly increases the score
    ev = surrogate(noise_free=True)
    base = OPTIMUM.as_dict()
    variants = []
    for n_g in (1, 2, 4, 6):
        variants.append(dict(base, n_g=n_g, s_g=[512] * n_g))
    variants.append(dict(base, s_g=[512, 480, 512]))
    variants.append(dict(base, s_d=960))
    for n_f in (1, 3, 5, 6):
        variants.append(dict(base, n_f=n_f, s_f=[1024] * n_f))
    variants.append(dict(base, s_f=[1024, 1024, 960, 1024]))
    variants.append(dict(base, a="tanh"))
    variants.append(dict(base, n_f=0, s_f=[], a=None))
    for v in variants:
        assert ev.evaluate(Setting(v), 1, 1, 0) > 0.60


def test_surrogate_params_validation():
    with pytest.raises(ValueError):
        SurrogateParams(noise_sd=-0.1)
    with pytest.raises(ValueError):
        SurrogateParams(no_hidden_penalty=-1.0)


# ---------------------------------------------------------------- external


def test_external_matches_builtin_surrogate():
    space = gnn_space()
    builtin = surrogate()
    rng = np.random.default_rng(5)
    with external(CHILD + ["surrogate"]) as ev:
        for _ in range(40):
            setting = space.decode(rng.uniform(size=16))
            seed = int(rng.integers(0, 2**53))
            ours = builtin.evaluate(setting, 1, 1, seed)
            theirs = ev.evaluate(setting, 1, 1, seed)
            assert abs(ours - theirs) <= 1e-9


def test_external_reuses_one_process():
    with external(CHILD + ["surrogate"]) as ev:
        ev.evaluate(OPTIMUM, 1, 1, 0)
        pid = ev._child.proc.pid
        for r in range(2, 6):
            ev.evaluate(OPTIMUM, 1, r, r)
        assert ev._child.proc.pid == pid


def test_external_restarts_once_after_crash():
    with external(CHILD + ["crash-one"]) as ev:
        first = ev.evaluate(OPTIMUM, 1, 1, 7)
        second = ev.evaluate(OPTIMUM, 1, 2, 7)  # old child is gone; restarted
        assert first == second  # same seed, same score


def test_external_reports_persistent_crash():
    with external(CHILD + ["die"]) as ev:
        with pytest.raises(EvaluationError, match="crashing"):
            ev.evaluate(OPTIMUM, 3, 1, 0)


def test_external_malformed_response_carries_payload():
    with external(CHILD + ["garbage"]) as ev:
        with pytest.raises(ProtocolError, match="not json"):
            ev.evaluate(OPTIMUM, 2, 1, 0)


def test_external_timeout():
    with external(CHILD + ["slow"], timeout=0.5) as ev:
        with pytest.raises(EvaluationTimeout, match="trial=4"):
            ev.evaluate(OPTIMUM, 4, 2, 0)


def test_external_error_response_for_bad_setting():
    with external(CHILD + ["surrogate"]) as ev:
        bad = Setting(dict(OPTIMUM.as_dict(), s_d=100))
        with pytest.raises(EvaluationError, match="reported"):
            ev.evaluate(bad, 5, 1, 0)
        # the child survives an error response and keeps serving
        assert ev.evaluate(OPTIMUM, 5, 2, 3) == ev.evaluate(OPTIMUM, 5, 3, 3)
