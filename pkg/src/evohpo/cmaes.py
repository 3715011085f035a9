"""Covariance matrix adaptation evolution strategy (minimization).

Seedable, self-contained ask/tell optimizer. Candidates are sampled from
the multivariate normal ``m + sigma * N(0, C)``; after evaluation the
distribution is adapted by weighted recombination of the best candidates
(positive weights only), a rank-one plus rank-mu covariance update, and
cumulative step-size adaptation. Strategy constants follow the widely
used tutorial defaults, e.g. ``pop_size = 4 + floor(3 ln n)``.

Fitness enters only through candidate ordering (ties broken by sampling
index), so the trajectory is invariant under strictly increasing fitness
transformations and fully determined by the seed.

Sampling needs an eigendecomposition ``C = B diag(D^2) B^T``; it is
computed by a cyclic Jacobi iteration and cached, refreshed lazily every
``max(1, floor(1 / (10 n (c_1 + c_mu))))`` generations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "EigenError",
    "CmaParams",
    "Candidate",
    "CmaEs",
    "eigendecompose",
]

STATE_FORMAT_VERSION = 1


class EigenError(RuntimeError):
    """Eigendecomposition failed to converge or found the matrix indefinite."""


def eigendecompose(cov, max_sweeps: int = 100, tol: float = 1e-12):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(basis, scale)``: an orthogonal matrix and the per-axis
    standard deviations sorted descending, with
    ``cov ~= basis @ diag(scale**2) @ basis.T`` reconstructed to within
    1e-9 elementwise for well-scaled inputs.

    The sweep stops once the largest off-diagonal magnitude falls below
    ``tol`` (taken relative to the matrix scale when that exceeds one).
    Raises EigenError if ``max_sweeps`` full sweeps do not converge, or if
    an eigenvalue is negative beyond -1e-12 (relative), which signals loss
    of positive definiteness upstream.
    """
    A = np.array(cov, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if float(np.max(np.abs(A - A.T))) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric within 1e-12")
    # plain float rows: at these sizes the rotations are much faster in
    # Python loops than through per-call numpy dispatch
    M = (0.5 * (A + A.T)).tolist()
    V = np.eye(n).tolist()
    rng_n = range(n)
    if n > 1:
        for _ in range(max_sweeps):
            off = max(abs(M[i][j]) for i in rng_n for j in rng_n if i != j)
            thresh = tol * max(1.0, max(abs(M[i][i]) for i in rng_n))
            if off <= thresh:
                break
            # entries this small cannot block convergence; skip their rotations
            skip = thresh / (2.0 * n)
            for p in range(n - 1):
                Mp = M[p]
                for q in range(p + 1, n):
                    apq = Mp[q]
                    if abs(apq) <= skip:
                        continue
                    Mq = M[q]
                    theta = (Mq[q] - Mp[p]) / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                    c = 1.0 / math.sqrt(t * t + 1.0)
                    s = t * c
                    app, aqq = Mp[p], Mq[q]
                    for row in M:
                        rp, rq = row[p], row[q]
                        row[p] = c * rp - s * rq
                        row[q] = s * rp + c * rq
                    for j in rng_n:
                        mpj, mqj = Mp[j], Mq[j]
                        Mp[j] = c * mpj - s * mqj
                        Mq[j] = s * mpj + c * mqj
                    # exact rotated diagonal; the target entry is annihilated
                    Mp[p] = app - t * apq
                    Mq[q] = aqq + t * apq
                    Mp[q] = 0.0
                    Mq[p] = 0.0
                    for row in V:
                        vp, vq = row[p], row[q]
                        row[p] = c * vp - s * vq
                        row[q] = s * vp + c * vq
        else:
            raise EigenError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    V = np.asarray(V)
    lam = np.array([M[i][i] for i in rng_n])
    lam_scale = max(1.0, float(np.max(lam))) if n else 1.0
    if n and float(np.min(lam)) < -1e-12 * lam_scale:
        raise EigenError(f"negative eigenvalue {float(np.min(lam)):g}: matrix not PSD")
    order = np.argsort(lam)[::-1]
    return V[:, order], np.sqrt(np.clip(lam[order], 0.0, None))


def _default_weights(mu: int) -> np.ndarray:
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    return w / w.sum()


@dataclass(frozen=True, eq=False)
class CmaParams:
    """Strategy constants: selection weights and learning rates.

    ``defaults`` fills every field from the standard formulas; individual
    fields can be overridden, and the result is validated as a whole.
    """

    dim: int
    pop_size: int
    parent_count: int
    weights: np.ndarray
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float

    def __post_init__(self):
        n, lam, mu = self.dim, self.pop_size, self.parent_count
        if n < 1:
            raise ValueError(f"dim must be >= 1, got {n}")
        if lam < 2:
            raise ValueError(f"pop_size must be >= 2, got {lam}")
        if not 1 <= mu <= lam:
            raise ValueError(f"parent_count must be in [1, {lam}], got {mu}")
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.shape != (mu,):
            raise ValueError(f"weights must have length parent_count={mu}")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")
        if np.any(np.diff(w) > 0):
            raise ValueError("weights must be nonincreasing")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        if abs(self.mu_eff - 1.0 / float(w @ w)) > 1e-9:
            raise ValueError("mu_eff inconsistent with weights")
        if not 1.0 - 1e-9 <= self.mu_eff <= mu + 1e-9:
            raise ValueError(f"mu_eff must lie in [1, {mu}], got {self.mu_eff}")
        for name in ("c_sigma", "c_c", "c_1"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        # rank-mu vanishes legitimately when mu_eff == 1 (single parent)
        if not 0.0 <= self.c_mu < 1.0:
            raise ValueError(f"c_mu must lie in [0, 1), got {self.c_mu}")
        if self.c_1 + self.c_mu > 1.0 + 1e-12:
            raise ValueError(f"c_1 + c_mu must be <= 1, got {self.c_1 + self.c_mu}")
        if self.d_sigma < 1.0:
            raise ValueError(f"d_sigma must be >= 1, got {self.d_sigma}")

    @classmethod
    def defaults(
        cls,
        dim: int,
        pop_size: Optional[int] = None,
        parent_count: Optional[int] = None,
        weights=None,
        c_sigma: Optional[float] = None,
        d_sigma: Optional[float] = None,
        c_c: Optional[float] = None,
        c_1: Optional[float] = None,
        c_mu: Optional[float] = None,
    ) -> "CmaParams":
        n = int(dim)
        if n < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        lam = int(pop_size) if pop_size is not None else 4 + int(3 * math.log(n))
        if lam < 2:
            raise ValueError(f"pop_size must be >= 2, got {lam}")
        mu = int(parent_count) if parent_count is not None else lam // 2
        if not 1 <= mu <= lam:
            raise ValueError(f"parent_count must be in [1, {lam}], got {mu}")
        w = np.asarray(weights, dtype=float) if weights is not None else _default_weights(mu)
        mu_eff = 1.0 / float(w @ w)
        cs = c_sigma if c_sigma is not None else (mu_eff + 2.0) / (n + mu_eff + 5.0)
        ds = (
            d_sigma
            if d_sigma is not None
            else 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + cs
        )
        cc = c_c if c_c is not None else (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n)
        c1 = c_1 if c_1 is not None else 2.0 / ((n + 1.3) ** 2 + mu_eff)
        cmu = (
            c_mu
            if c_mu is not None
            else min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) ** 2 + mu_eff))
        )
        return cls(
            dim=n,
            pop_size=lam,
            parent_count=mu,
            weights=w,
            mu_eff=mu_eff,
            c_sigma=cs,
            d_sigma=ds,
            c_c=cc,
            c_1=c1,
            c_mu=cmu,
        )

    @property
    def chi_n(self) -> float:
        """Closed-form approximation of E||N(0, I_n)||."""
        n = self.dim
        return math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))

    @property
    def eigen_interval(self) -> int:
        """Generations between lazy eigendecomposition refreshes."""
        return max(1, int(1.0 / (10.0 * self.dim * (self.c_1 + self.c_mu))))


@dataclass
class Candidate:
    """One sampled point: ``vector = mean + sigma * basis @ (scale * z)``."""

    index: int  # 1-based position within its generation
    vector: np.ndarray
    z: np.ndarray  # the underlying standard-normal draw
    generation: int
    fitness: Optional[float] = None


class CmaEs:
    """Ask/tell CMA-ES state: mean, step size, covariance, evolution paths.

    Single-owner: mutate only through ``ask``/``tell``. Candidates are
    value objects and may be evaluated concurrently; ``tell`` re-sorts
    them deterministically (fitness ascending, sampling index on ties).
    """

    def __init__(self, dim, mean0, sigma0, seed, cov0=None, **overrides):
        if sigma0 <= 0:
            raise ValueError(f"sigma0 must be positive, got {sigma0}")
        mean = np.array(mean0, dtype=float)
        if mean.shape != (int(dim),):
            raise ValueError(f"mean0 must have length dim={dim}, got shape {mean.shape}")
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean0 has non-finite components")
        self.params = CmaParams.defaults(int(dim), **overrides)
        self.mean = mean
        self.sigma = float(sigma0)
        if cov0 is None:
            self.cov = np.eye(self.params.dim)
        else:
            self.cov = np.array(cov0, dtype=float)
            if self.cov.shape != (self.params.dim, self.params.dim):
                raise ValueError(f"cov0 must be {dim}x{dim}")
        self.path_sigma = np.zeros(self.params.dim)
        self.path_c = np.zeros(self.params.dim)
        self.generation = 0
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self._gens_since_eigen = 0
        self._refresh_eigen()

    @property
    def basis(self) -> np.ndarray:
        """Cached eigenbasis B (columns orthonormal)."""
        return self._basis

    @property
    def scale(self) -> np.ndarray:
        """Cached per-axis standard deviations D (descending)."""
        return self._scale

    def _refresh_eigen(self) -> None:
        self.cov = 0.5 * (self.cov + self.cov.T)
        basis, scale = eigendecompose(self.cov)
        lam = scale**2
        floor = 1e-14 * float(lam.max())
        if float(lam.min()) < floor:
            # variance floor: prevents SPD collapse on long flat runs
            lam = np.maximum(lam, floor)
            cov = basis @ np.diag(lam) @ basis.T
            self.cov = 0.5 * (cov + cov.T)
            scale = np.sqrt(lam)
        self._basis = basis
        self._scale = scale
        self._gens_since_eigen = 0

    def ask(self) -> list:
        """Sample one generation of ``pop_size`` candidates i.i.d. from
        ``N(mean, sigma^2 C)``. Deterministic given the rng state."""
        if self._gens_since_eigen >= self.params.eigen_interval:
            self._refresh_eigen()
        lam = self.params.pop_size
        z = self.rng.standard_normal((lam, self.params.dim))
        x = self.mean + self.sigma * ((z * self._scale) @ self._basis.T)
        return [
            Candidate(k + 1, x[k].copy(), z[k].copy(), self.generation)
            for k in range(lam)
        ]

    def tell(self, candidates: Sequence[Candidate]) -> None:
        """Consume one fully evaluated generation and adapt the state.

        Sorts ascending by fitness (ties by candidate index), recombines
        the ``parent_count`` best into the new mean, updates both
        evolution paths, applies the rank-one + rank-mu covariance update,
        and rescales sigma from the length of the conjugate path.
        """
        par = self.params
        if len(candidates) != par.pop_size:
            raise ValueError(
                f"expected {par.pop_size} candidates, got {len(candidates)}"
            )
        if sorted(c.index for c in candidates) != list(range(1, par.pop_size + 1)):
            raise ValueError("candidate indices are not the asked generation")
        for c in candidates:
            if c.generation != self.generation:
                raise ValueError(
                    f"stale candidate from generation {c.generation}, "
                    f"current is {self.generation}"
                )
            if c.fitness is None or not math.isfinite(c.fitness):
                raise ValueError(f"candidate {c.index} has non-finite fitness {c.fitness!r}")

        ranked = sorted(candidates, key=lambda c: (c.fitness, c.index))
        sel = ranked[: par.parent_count]
        x_sel = np.stack([c.vector for c in sel])
        z_sel = np.stack([c.z for c in sel])
        w = par.weights

        new_mean = w @ x_sel  # convex recombination of the best parents
        zw = w @ z_sel

        cs, cc = par.c_sigma, par.c_c
        self.path_sigma = (1.0 - cs) * self.path_sigma + math.sqrt(
            cs * (2.0 - cs) * par.mu_eff
        ) * (self._basis @ zw)
        ps_norm = float(np.linalg.norm(self.path_sigma))
        # stall the rank-one path while sigma is still blowing up
        unbias = math.sqrt(1.0 - (1.0 - cs) ** (2 * (self.generation + 1)))
        hsig = 1.0 if ps_norm / unbias < (1.4 + 2.0 / (par.dim + 1.0)) * par.chi_n else 0.0
        yw = self._basis @ (self._scale * zw)
        self.path_c = (1.0 - cc) * self.path_c + hsig * math.sqrt(
            cc * (2.0 - cc) * par.mu_eff
        ) * yw

        y_sel = (z_sel * self._scale) @ self._basis.T
        rank_mu = y_sel.T @ (w[:, None] * y_sel)
        delta = (1.0 - hsig) * cc * (2.0 - cc)
        cov = (
            (1.0 - par.c_1 - par.c_mu) * self.cov
            + par.c_1 * (np.outer(self.path_c, self.path_c) + delta * self.cov)
            + par.c_mu * rank_mu
        )
        self.cov = 0.5 * (cov + cov.T)

        self.sigma *= math.exp((cs / par.d_sigma) * (ps_norm / par.chi_n - 1.0))
        self.mean = new_mean
        self.generation += 1
        self._gens_since_eigen += 1

    def save_state(self) -> str:
        """Serialize the full state (including the eigen cache and rng) as
        a versioned JSON text record; ``load_state`` restores it bit-exactly."""
        par = self.params
        record = {
            "version": STATE_FORMAT_VERSION,
            "params": {
                "dim": par.dim,
                "pop_size": par.pop_size,
                "parent_count": par.parent_count,
                "weights": par.weights.tolist(),
                "mu_eff": par.mu_eff,
                "c_sigma": par.c_sigma,
                "d_sigma": par.d_sigma,
                "c_c": par.c_c,
                "c_1": par.c_1,
                "c_mu": par.c_mu,
            },
            "mean": self.mean.tolist(),
            "sigma": self.sigma,
            "cov": self.cov.tolist(),
            "path_sigma": self.path_sigma.tolist(),
            "path_c": self.path_c.tolist(),
            "generation": self.generation,
            "gens_since_eigen": self._gens_since_eigen,
            "eig_basis": self._basis.tolist(),
            "eig_scale": self._scale.tolist(),
            "rng": self.rng.bit_generator.state,
        }
        return json.dumps(record)

    @classmethod
    def load_state(cls, text: str) -> "CmaEs":
        record = json.loads(text)
        version = record.get("version")
        if version != STATE_FORMAT_VERSION:
            raise ValueError(f"unsupported state format version {version!r}")
        p = record["params"]
        es = cls.__new__(cls)
        es.params = CmaParams(
            dim=p["dim"],
            pop_size=p["pop_size"],
            parent_count=p["parent_count"],
            weights=np.asarray(p["weights"], dtype=float),
            mu_eff=p["mu_eff"],
            c_sigma=p["c_sigma"],
            d_sigma=p["d_sigma"],
            c_c=p["c_c"],
            c_1=p["c_1"],
            c_mu=p["c_mu"],
        )
        es.mean = np.asarray(record["mean"], dtype=float)
        es.sigma = float(record["sigma"])
        es.cov = np.asarray(record["cov"], dtype=float)
        es.path_sigma = np.asarray(record["path_sigma"], dtype=float)
        es.path_c = np.asarray(record["path_c"], dtype=float)
        es.generation = int(record["generation"])
        es._gens_since_eigen = int(record["gens_since_eigen"])
        es._basis = np.asarray(record["eig_basis"], dtype=float)
        es._scale = np.asarray(record["eig_scale"], dtype=float)
        bitgen = np.random.PCG64()
        bitgen.state = record["rng"]
        es.rng = np.random.Generator(bitgen)
        return es
