"""Seeded Monte Carlo harness for the hazard estimators.

Replication ``r`` draws its sample from
``numpy.random.default_rng(SeedSequence(master_seed, spawn_key=(r,)))``, so a
replication's data depends only on ``(master_seed, r)``. Replications may be
computed in any order or in parallel; raw estimates are stored by index and
all summaries are computed from that array, which makes serial, parallel and
pooled runs bit-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from .asymptotics import direct_bias_coeff, direct_variance_coeff
from .estimators import (
    DegenerateDenominatorError,
    EstimatorSpec,
    SortedSample,
)
from .kernels import Kernel, epanechnikov
from .models import ParametricModel

__all__ = [
    "SimulationSpec",
    "SimulationResult",
    "NormalityResult",
    "replication_rng",
    "simulate",
    "simulate_mse",
    "simulate_mise",
    "improvement_rate",
    "pool",
    "normality_check",
]

MAX_SKIP_FRACTION = 0.01
MIN_NORMALITY_REPS = 100


def replication_rng(master_seed: int, r: int) -> np.random.Generator:
    """Independent stream for replication ``r``."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(r,)))


@dataclass(frozen=True)
class SimulationSpec:
    model: ParametricModel
    n: int
    replications: int
    estimators: tuple[EstimatorSpec, ...]
    quantile_range: tuple[float, float] = (0.05, 0.95)
    grid: int = 101
    master_seed: int = 0
    first_replication: int = 0

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        lo, hi = self.quantile_range
        if not 0.0 < lo < hi < 1.0:
            raise ValueError("quantile range must satisfy 0 < lo < hi < 1")
        if self.grid < 2:
            raise ValueError("grid must have at least 2 points")
        if isinstance(self.estimators, EstimatorSpec):
            object.__setattr__(self, "estimators", (self.estimators,))
        else:
            object.__setattr__(self, "estimators", tuple(self.estimators))
        if not self.estimators:
            raise ValueError("at least one estimator is required")

    def points(self) -> np.ndarray:
        lo, hi = self.quantile_range
        return np.linspace(self.model.quantile(lo), self.model.quantile(hi), self.grid)


@dataclass
class SimulationResult:
    """Raw per-replication estimates plus their summaries.

    ``estimates`` has shape ``(replications, n_estimators, n_points)``; failed
    evaluations are NaN and counted in ``skipped``.
    """

    x: np.ndarray
    truth: np.ndarray
    estimates: np.ndarray
    fallbacks: np.ndarray
    labels: tuple[str, ...]
    replication_ids: np.ndarray
    bias: np.ndarray = field(init=False)
    variance: np.ndarray = field(init=False)
    mse: np.ndarray = field(init=False)
    skipped: np.ndarray = field(init=False)

    def __post_init__(self):
        est = self.estimates
        err = est - self.truth
        ok = ~np.isnan(est)
        self.skipped = (~ok).sum(axis=(0, 2))
        cnt = ok.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(ok, est, 0.0).sum(axis=0) / cnt
            self.bias = mean - self.truth
            self.variance = np.where(ok, (est - mean) ** 2, 0.0).sum(axis=0) / cnt
            self.mse = np.where(ok, err ** 2, 0.0).sum(axis=0) / cnt

    @property
    def replications(self) -> int:
        return self.estimates.shape[0]

    @property
    def mise(self) -> np.ndarray:
        """Trapezoid integral of the MSE over the x grid, one value per estimator."""
        if self.x.size == 1:
            return self.mse[:, 0].copy()
        return integrate.trapezoid(self.mse, self.x, axis=-1)

    @property
    def skip_fraction(self) -> np.ndarray:
        return self.skipped / (self.replications * self.x.size)

    @property
    def valid(self) -> bool:
        return bool(np.all(self.skip_fraction <= MAX_SKIP_FRACTION))

    @property
    def improvement_rate(self) -> float:
        """``100 * (1 - MISE[second] / MISE[first])``."""
        if self.mse.shape[0] != 2:
            raise ValueError("improvement rate needs exactly two estimators")
        base, alt = self.mise
        return 100.0 * (1.0 - alt / base)

    def to_dict(self) -> dict:
        out = {
            "replications": self.replications,
            "labels": list(self.labels),
            "mise": [float(v) for v in self.mise],
            "skipped": [int(v) for v in self.skipped],
            "ts_fallbacks": [int(v) for v in self.fallbacks],
            "valid": self.valid,
        }
        if self.mse.shape[0] == 2:
            out["improvement_rate"] = self.improvement_rate
        return out

    def grid_records(self, which: int = 0) -> list[dict]:
        return [
            {"x": float(x), "bias": float(b), "variance": float(v), "mse": float(m)}
            for x, b, v, m in zip(self.x, self.bias[which], self.variance[which], self.mse[which])
        ]


def _evaluate(est: EstimatorSpec, sample: SortedSample, x: np.ndarray):
    try:
        vals, fb = est.evaluate(sample, x, on_degenerate="nan")
    except (DegenerateDenominatorError, ValueError, ArithmeticError):
        return np.full(x.shape, np.nan), 0
    return np.asarray(vals, dtype=float), fb


def _run_block(spec: SimulationSpec, x: np.ndarray, start: int, stop: int):
    k = len(spec.estimators)
    out = np.empty((stop - start, k, x.size))
    fallbacks = np.zeros(k, dtype=np.int64)
    for i, r in enumerate(range(start, stop)):
        sample = SortedSample(spec.model.sample(spec.n, replication_rng(spec.master_seed, r)))
        for j, est in enumerate(spec.estimators):
            out[i, j], fb = _evaluate(est, sample, x)
            fallbacks[j] += fb
    return out, fallbacks


def simulate(spec: SimulationSpec, points=None, *, workers: int = 1, chunk: int = 250) -> SimulationResult:
    """Run all replications of ``spec`` at ``points`` (default: the spec's quantile grid)."""
    x = spec.points() if points is None else np.atleast_1d(np.asarray(points, dtype=float))
    truth = np.asarray(spec.model.hazard(x), dtype=float)
    first = spec.first_replication
    bounds = [(s, min(s + chunk, first + spec.replications))
              for s in range(first, first + spec.replications, chunk)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_:
            parts = list(pool_.map(lambda b: _run_block(spec, x, *b), bounds))
    else:
        parts = [_run_block(spec, x, *b) for b in bounds]
    estimates = np.concatenate([p[0] for p in parts], axis=0)
    fallbacks = np.sum([p[1] for p in parts], axis=0)
    labels = tuple(f"{e.kind}(h={e.bandwidth})" for e in spec.estimators)
    ids = np.arange(first, first + spec.replications)
    return SimulationResult(x, truth, estimates, fallbacks, labels, ids)


def simulate_mse(spec: SimulationSpec, x0, **kw) -> SimulationResult:
    """Pointwise empirical bias, variance and MSE at ``x0``."""
    return simulate(spec, points=x0, **kw)


def simulate_mise(spec: SimulationSpec, **kw) -> SimulationResult:
    """MSE over the spec's quantile grid; ``result.mise`` holds the integrals."""
    return simulate(spec, **kw)


def improvement_rate(spec: SimulationSpec, **kw) -> float:
    """``100 * (1 - MISE[estimators[1]] / MISE[estimators[0]])``."""
    if len(spec.estimators) != 2:
        raise ValueError("improvement rate compares exactly two estimators")
    return simulate_mise(spec, **kw).improvement_rate


def pool(*results: SimulationResult) -> SimulationResult:
    """Merge runs over disjoint replication ranges, ordered by replication index."""
    if not results:
        raise ValueError("nothing to pool")
    first = results[0]
    for r in results[1:]:
        if not (np.array_equal(r.x, first.x) and r.labels == first.labels):
            raise ValueError("can only pool runs on the same grid and estimators")
    ids = np.concatenate([r.replication_ids for r in results])
    if np.unique(ids).size != ids.size:
        raise ValueError("replication ranges overlap")
    order = np.argsort(ids, kind="stable")
    est = np.concatenate([r.estimates for r in results], axis=0)[order]
    fb = np.sum([r.fallbacks for r in results], axis=0)
    return SimulationResult(first.x, first.truth, est, fb, first.labels, ids[order])


@dataclass(frozen=True)
class NormalityResult:
    statistic: float
    pvalue: float
    z: np.ndarray
    h: float
    bias_coeff: float
    variance_coeff: float


def normality_check(model: ParametricModel, x0: float, n: int, *, c: float = 1.0, d: float = 1.0 / 3.0,
                    replications: int = 2000, master_seed: int = 0,
                    kernel: Kernel = epanechnikov, workers: int = 1) -> NormalityResult:
    """Kolmogorov-Smirnov test of the standardised direct estimator against N(0, 1).

    The bandwidth is ``h = c * n^(-d)`` with ``1/5 <= d < 1/2``; each replicate
    is standardised as ``sqrt(n h) (H_hat - H - h^2 B1) / sqrt(V1)``.
    """
    if not 0.2 <= d < 0.5:
        raise ValueError(f"bandwidth exponent d must satisfy 1/5 <= d < 1/2, got {d}")
    if replications < MIN_NORMALITY_REPS:
        raise ValueError(f"insufficient replicates: need at least {MIN_NORMALITY_REPS}")
    h = c * n ** -d
    spec = SimulationSpec(model, n, replications, (EstimatorSpec("direct", kernel, h),),
                          master_seed=master_seed)
    res = simulate(spec, points=[x0], workers=workers)
    b1 = direct_bias_coeff(model, x0, kernel)
    v1 = direct_variance_coeff(model, x0, kernel)
    z = math.sqrt(n * h) * (res.estimates[:, 0, 0] - res.truth[0] - h * h * b1) / math.sqrt(v1)
    ks = stats.kstest(z, "norm")
    return NormalityResult(float(ks.statistic), float(ks.pvalue), z, h, b1, v1)
