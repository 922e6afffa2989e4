"""Statistical reductions: medians, the per-run fidelity estimator, median of means."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from shadowqae.stabilizer import CliffordOp


@dataclass(frozen=True)
class ShadowRecord:
    """One snapshot as sent from Bob to Alice."""

    clifford: CliffordOp
    outcome: int

    def __post_init__(self):
        if not 0 <= self.outcome < (1 << self.clifford.n):
            raise ValueError("outcome does not fit the Clifford's qubit count")


@dataclass(frozen=True)
class AmplitudeSample:
    index: int
    estimates: tuple[float, ...]
    median_a: float

    @classmethod
    def from_estimates(cls, index: int, estimates: Sequence[float]) -> "AmplitudeSample":
        est = tuple(float(e) for e in estimates)
        if not est:
            raise ValueError("need at least one amplitude estimate")
        if any(not 0.0 <= e <= 1.0 for e in est):
            raise ValueError("amplitude estimates must lie in [0, 1]")
        return cls(index, est, median(est))


@dataclass(frozen=True)
class RunEstimate:
    f_hat: float
    n: int
    N: int
    M: int | None = None
    K: int | None = None
    terms: np.ndarray | None = field(default=None, repr=False, compare=False)


def median(values: Sequence[float]) -> float:
    """Middle order statistic; the midpoint of the two middle values for even length."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("median of an empty sequence")
    return float(np.median(arr))


def run_estimate_from_medians(medians: np.ndarray, n: int, keep_terms: bool = False, **meta) -> RunEstimate:
    """``(2^n + 1) * mean(medians) - 1`` for an array of per-snapshot medians."""
    med = np.asarray(medians, dtype=float)
    if med.size == 0:
        raise ValueError("no snapshots")
    d1 = float(2 ** n + 1)
    # np.mean uses pairwise summation: order-fixed and reproducible
    f_hat = d1 * float(np.mean(med)) - 1.0
    terms = d1 * med - 1.0 if keep_terms else None
    return RunEstimate(f_hat, n, med.size, terms=terms, **meta)


def run_estimator(samples: Sequence[AmplitudeSample], n: int, N: int) -> RunEstimate:
    if len(samples) != N:
        raise ValueError(f"expected {N} amplitude samples, got {len(samples)}")
    return run_estimate_from_medians(np.array([s.median_a for s in samples]), n)


def median_of_means(run_estimates: Sequence[float]) -> float:
    """Median of independent run estimates (each already a mean over snapshots)."""
    vals = [r.f_hat if isinstance(r, RunEstimate) else float(r) for r in run_estimates]
    if not vals:
        raise ValueError("median_of_means needs at least one run")
    return median(vals)


def mean_of_runs(run_estimates: Sequence[float]) -> float:
    vals = np.array([r.f_hat if isinstance(r, RunEstimate) else float(r) for r in run_estimates])
    if vals.size == 0:
        raise ValueError("mean_of_runs needs at least one run")
    return float(np.mean(vals))


AGGREGATORS = {"median-of-means": median_of_means, "mean": mean_of_runs}
