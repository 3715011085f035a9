"""Shared test utilities."""

import numpy as np

from evohpo.cmaes import CmaEs


def minimize(func, dim, mean0, sigma0, seed, max_evals, target=-np.inf, **overrides):
    """Drive an ask/tell loop; returns (best fitness, evaluations used)."""
    es = CmaEs(dim, mean0, sigma0, seed, **overrides)
    best, evals = np.inf, 0
    while evals < max_evals:
        candidates = es.ask()
        for c in candidates:
            c.fitness = func(c.vector)
        evals += len(candidates)
        best = min(best, min(c.fitness for c in candidates))
        if best < target:
            break
        es.tell(candidates)
    return best, evals


def trajectory(func, dim, mean0, sigma0, seed, generations):
    """Run a fixed number of generations; returns per-generation record
    dicts with candidate vectors and post-tell state."""
    es = CmaEs(dim, mean0, sigma0, seed)
    out = []
    for _ in range(generations):
        candidates = es.ask()
        for c in candidates:
            c.fitness = func(c.vector)
        vectors = np.stack([c.vector for c in candidates])
        order = sorted(range(len(candidates)), key=lambda i: (candidates[i].fitness, i))
        es.tell(candidates)
        out.append(
            {
                "vectors": vectors,
                "order": order,
                "mean": es.mean.copy(),
                "sigma": es.sigma,
                "cov": es.cov.copy(),
            }
        )
    return out
