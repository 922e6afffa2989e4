"""Outcome statistics of phase-estimation amplitude estimation.

Production code never simulates the circuit: the ancilla readout ``y`` of the
canonical algorithm with ``M = 2**m`` grid points has the closed-form law

    Pr(y) = 1/2 F_M(theta/pi - y/M) + 1/2 F_M(1 - theta/pi - y/M),
    F_M(w) = sin^2(M pi d(w)) / (M^2 sin^2(pi d(w))),

with ``sin^2(theta) = a`` and ``d`` the distance to the nearest integer.
:func:`circuit_oracle_distribution` builds the circuit densely for tiny
registers and is used to cross-check the formula.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

DEFAULT_MASS_FLOOR = 0.999
_ON_GRID_TOL = 1e-15


@dataclass(frozen=True)
class QaeGrid:
    m: int

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValueError(f"ancilla count must be >= 1, got {self.m!r}")

    @property
    def M(self) -> int:
        return 1 << self.m

    @classmethod
    def from_iterations(cls, M: int) -> "QaeGrid":
        """Grid with ``M`` points; ``M`` must be a power of two >= 2."""
        M = int(M)
        if M < 2 or M & (M - 1):
            raise ValueError(f"M must be a power of two >= 2, got {M}")
        return cls(M.bit_length() - 1)


@dataclass(frozen=True, eq=False)
class QaeDistribution:
    """Law of the readout ``y`` for true amplitude ``a``.

    After truncation ``probs`` is zero off the retained ``support``; sampling
    uses ``cdf`` over ``support`` (ascending ``y``).
    """

    grid: QaeGrid
    a: float
    theta_a: float
    probs: np.ndarray
    truncated: bool = False
    kept_mass: float = 1.0
    mass_floor: float | None = None
    support: np.ndarray = field(default=None, repr=False)
    cdf: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        probs = self.probs
        probs.setflags(write=False)
        if self.support is None:
            object.__setattr__(self, "support", np.flatnonzero(probs > 0))
        if self.cdf is None:
            cdf = np.cumsum(probs[self.support])
            cdf /= cdf[-1]
            object.__setattr__(self, "cdf", cdf)

    def estimates(self) -> np.ndarray:
        """Amplitude estimate attached to every outcome ``y``."""
        return np.sin(np.pi * np.arange(self.grid.M) / self.grid.M) ** 2

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y", "prob"])
            for y, p in enumerate(self.probs):
                w.writerow([y, repr(float(p))])


def theta_from_amplitude(a: float) -> float:
    """Principal angle in ``[0, pi/2]`` with ``sin^2(theta) = a``."""
    if not 0.0 <= a <= 1.0 or math.isnan(a):
        raise ValueError(f"amplitude must lie in [0, 1], got {a}")
    return math.asin(math.sqrt(a))


def grid_distance(w1, w2):
    """Distance on the unit circle: ``min_p |p + w1 - w2|``."""
    diff = np.asarray(w1, dtype=float) - np.asarray(w2, dtype=float)
    out = np.abs(diff - np.round(diff))
    return float(out) if out.ndim == 0 else out


def _fejer(dist: np.ndarray, M: int) -> np.ndarray:
    out = np.ones_like(dist)
    off = dist >= _ON_GRID_TOL
    num = np.sin(M * np.pi * dist[off]) ** 2
    den = (M * np.sin(np.pi * dist[off])) ** 2
    out[off] = num / den
    return out


def closed_form_probs(a: float, M: int) -> np.ndarray:
    """The two-branch Fejer-kernel law evaluated on an ``M``-point grid.

    Defined for any integer ``M >= 2``; the algorithm itself only uses powers
    of two (see :func:`outcome_distribution`).
    """
    theta = theta_from_amplitude(a)
    M = int(M)
    if M < 2:
        raise ValueError("M must be >= 2")
    y = np.arange(M) / M
    w = theta / math.pi
    return 0.5 * _fejer(grid_distance(w, y), M) + 0.5 * _fejer(grid_distance(1.0 - w, y), M)


def outcome_distribution(a: float, grid: QaeGrid) -> QaeDistribution:
    """Full closed-form readout law over ``y = 0..M-1``."""
    probs = closed_form_probs(a, grid.M)
    return QaeDistribution(grid, float(a), theta_from_amplitude(a), probs)


def _truncate_probs(p: np.ndarray, mass_floor: float) -> tuple[np.ndarray, np.ndarray, float]:
    order = np.lexsort((np.arange(p.size), -p))
    cum = np.cumsum(p[order])
    total = cum[-1]
    # the full vector sums to 1 only up to rounding; compare against the realized total
    count = int(np.searchsorted(cum, mass_floor * total - 1e-15 * total)) + 1
    keep = np.sort(order[:min(count, p.size)])
    kept_mass = float(p[keep].sum())
    probs = np.zeros_like(p)
    probs[keep] = p[keep] / kept_mass
    return probs, keep, kept_mass


def expected_median_estimate(a: float, M: int, K: int, mass_floor: float | None = DEFAULT_MASS_FLOOR) -> float:
    """Exact mean of the median of K independent estimates ``sin^2(pi y / M)``.

    Uses order statistics of the (optionally truncated) readout law; for even
    K the median is the midpoint of the two middle order statistics.
    """
    from scipy.stats import binom

    p = closed_form_probs(a, M)
    if mass_floor is not None:
        p, _, _ = _truncate_probs(p, mass_floor)
    est = np.sin(np.pi * np.arange(M) / M) ** 2
    values, inverse = np.unique(np.round(est, 14), return_inverse=True)
    mass = np.bincount(inverse, weights=p / p.sum())
    cdf = np.minimum(np.cumsum(mass), 1.0)

    def order_stat_mean(j: int) -> float:
        at_most = binom.sf(j - 1, K, cdf)  # Pr(X_(j) <= v)
        return float(values @ np.diff(np.concatenate([[0.0], at_most])))

    if K % 2:
        return order_stat_mean((K + 1) // 2)
    return 0.5 * (order_stat_mean(K // 2) + order_stat_mean(K // 2 + 1))


def truncate_distribution(
    dist: QaeDistribution, mass_floor: float = DEFAULT_MASS_FLOOR
) -> QaeDistribution:
    """Keep the most probable outcomes until their mass reaches ``mass_floor``, then renormalize.

    Ties go to the smaller ``y``.
    """
    if not 0.0 < mass_floor <= 1.0:
        raise ValueError(f"mass_floor must lie in (0, 1], got {mass_floor}")
    if dist.truncated:
        raise ValueError("distribution is already truncated")
    probs, keep, kept_mass = _truncate_probs(np.asarray(dist.probs), mass_floor)
    return QaeDistribution(
        dist.grid, dist.a, dist.theta_a, probs,
        truncated=True, kept_mass=kept_mass, mass_floor=mass_floor, support=keep,
    )


@lru_cache(maxsize=4096)
def truncated_distribution(a: float, M: int, mass_floor: float = DEFAULT_MASS_FLOOR) -> QaeDistribution:
    """Cached ``truncate_distribution(outcome_distribution(a, M))``.

    Stabilizer amplitudes are powers of 1/2, so a whole experiment touches only
    a handful of distinct ``(a, M)`` pairs.
    """
    return truncate_distribution(outcome_distribution(a, QaeGrid.from_iterations(M)), mass_floor)


def sample_outcome(dist: QaeDistribution, rng: np.random.Generator, size=None):
    """Inverse-CDF draw(s) of ``y`` from the retained support."""
    u = rng.random(size)
    idx = np.searchsorted(dist.cdf, u, side="right")
    idx = np.minimum(idx, dist.support.size - 1)
    out = dist.support[idx]
    return int(out) if size is None else out


def estimate_from_outcome(y, grid: QaeGrid):
    """Amplitude estimate ``sin^2(pi y / M)``."""
    M = grid.M
    arr = np.asarray(y)
    if np.any((arr < 0) | (arr >= M)):
        raise ValueError(f"outcome out of range [0, {M})")
    est = np.sin(np.pi * arr / M) ** 2
    return float(est) if est.ndim == 0 else est


# --- dense circuit reference -------------------------------------------------

MAX_ORACLE_STATE_QUBITS = 3
MAX_ORACLE_ANCILLAS = 5


@dataclass(frozen=True, eq=False)
class QaeTargetSpec:
    """Prepared vector ``A|0>`` and the single marked basis string."""

    state: np.ndarray
    good: int

    def __post_init__(self):
        v = np.asarray(self.state, dtype=complex)
        d = v.shape[0]
        if d < 2 or d & (d - 1):
            raise ValueError("state length must be a power of two")
        if not np.isclose(np.linalg.norm(v), 1.0, atol=1e-10):
            raise ValueError("state must be unit norm")
        if not 0 <= self.good < d:
            raise ValueError("good string out of range")
        object.__setattr__(self, "state", v)

    @property
    def n(self) -> int:
        return self.state.shape[0].bit_length() - 1

    @property
    def amplitude(self) -> float:
        return float(abs(self.state[self.good]) ** 2)


def _householder_preparation(psi: np.ndarray) -> np.ndarray:
    """Unitary whose first column is ``psi`` (exactly, up to a phase on psi)."""
    d = psi.shape[0]
    e0 = np.zeros(d, dtype=complex)
    e0[0] = 1.0
    phase = psi[0] / abs(psi[0]) if abs(psi[0]) > 1e-12 else 1.0
    target = psi / phase
    w = e0 - target
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return np.eye(d, dtype=complex) * phase
    w = w / nw
    return (np.eye(d, dtype=complex) - 2.0 * np.outer(w, w.conj())) * phase


def _qft_matrix(M: int) -> np.ndarray:
    j = np.arange(M)
    return np.exp(2j * np.pi * np.outer(j, j) / M) / np.sqrt(M)


def controlled_power_layers(Q: np.ndarray, m: int) -> np.ndarray:
    """Product ``U_m ... U_1`` with ``U_l`` applying ``Q^(2^(l-1))`` when ancilla ``l`` is set.

    Ancilla ``l`` (1-based) is bit ``l-1`` of the ancilla register index;
    register order is ``ancilla (x) state``.
    """
    d = Q.shape[0]
    M = 1 << m
    total = np.eye(M * d, dtype=complex)
    power = Q.copy()
    for l in range(1, m + 1):
        U = np.zeros((M * d, M * d), dtype=complex)
        for j in range(M):
            blk = slice(j * d, (j + 1) * d)
            U[blk, blk] = power if (j >> (l - 1)) & 1 else np.eye(d)
        total = U @ total
        power = power @ power
    return total


def circuit_oracle_distribution(target: QaeTargetSpec, grid: QaeGrid) -> QaeDistribution:
    """Readout law from an explicit dense simulation of the whole circuit."""
    n, m = target.n, grid.m
    if n > MAX_ORACLE_STATE_QUBITS or m > MAX_ORACLE_ANCILLAS:
        raise ValueError(
            f"dense oracle limited to n <= {MAX_ORACLE_STATE_QUBITS}, m <= {MAX_ORACLE_ANCILLAS}"
        )
    d, M = 1 << n, grid.M
    A = _householder_preparation(target.state)
    eye = np.eye(d, dtype=complex)
    S0 = eye.copy()
    S0[0, 0] = -1.0
    Schi = eye.copy()
    Schi[target.good, target.good] = -1.0
    Q = -A @ S0 @ A.conj().T @ Schi

    zero = np.zeros(M * d, dtype=complex)
    zero[0] = 1.0
    prep = np.kron(_qft_matrix(M), A)
    lam = controlled_power_layers(Q, m)
    readout = np.kron(_qft_matrix(M).conj().T, eye)
    final = readout @ lam @ prep @ zero
    probs = (np.abs(final.reshape(M, d)) ** 2).sum(axis=1)
    a = min(max(target.amplitude, 0.0), 1.0)
    return QaeDistribution(grid, a, theta_from_amplitude(a), probs)
