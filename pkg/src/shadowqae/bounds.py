"""Resource formulas and concentration bounds behind the fidelity estimator."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

#: Probability that one QAE run lands within its error radius is at least this.
QAE_SUCCESS_PROB = 8.0 / math.pi ** 2
#: Complement: per-run failure probability bound, about 0.1894.
QAE_FAILURE_BOUND = 1.0 - QAE_SUCCESS_PROB

_K_COEFF = 1.0 / (2.0 * (QAE_SUCCESS_PROB - 0.5) ** 2)
COROLLARY_DELTA_MAX = 0.09
COROLLARY_DELTA0 = 1.0 / 3.0


def _check_unit(name: str, v: float) -> None:
    if not 0.0 < v < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {v}")


def m_threshold(epsilon: float, n: int) -> float:
    """Real-valued lower bound on QAE iterations: ``2 pi sqrt(3(d+1)) / (6 eps / 13)^2``."""
    return 2.0 * math.pi * math.sqrt(3.0 * (2 ** n + 1)) / (6.0 * epsilon / 13.0) ** 2


def k_threshold(N: float, delta: float) -> float:
    return _K_COEFF * math.log(4.0 * N / delta)


@dataclass(frozen=True)
class ResourcePlan:
    epsilon: float
    delta: float
    n: int
    M_min: int
    N_min: int
    N_max: float
    K_min: int
    feasible: bool
    N_total_bob: int
    N_total_alice: int

    @property
    def N_total(self) -> int:
        return self.N_total_bob + self.N_total_alice

    def as_dict(self) -> dict:
        out = asdict(self)
        out["N_total"] = self.N_total
        return out


@dataclass(frozen=True)
class CorollaryPlan:
    epsilon: float
    delta: float
    n: int
    P: int
    N: int
    K: int
    M: int

    @property
    def bob_cost(self) -> int:
        return self.P * self.N

    @property
    def alice_cost(self) -> int:
        return self.P * self.N * self.K * self.M

    def as_dict(self) -> dict:
        out = asdict(self)
        out.update(bob_cost=self.bob_cost, alice_cost=self.alice_cost)
        return out


def proposition4_plan(epsilon: float, delta: float, n: int) -> ResourcePlan:
    """Smallest single-run (N, M, K) meeting the accuracy guarantee, plus feasibility.

    Feasible when ``ceil(24/(eps^2 delta)) <= (13/6)^4 delta / (12 eps^4)``; the
    plan is returned either way with ``feasible`` set accordingly.
    """
    _check_unit("epsilon", epsilon)
    _check_unit("delta", delta)
    if n < 1:
        raise ValueError("n must be >= 1")
    n_low = 24.0 / (epsilon ** 2 * delta)
    n_high = (13.0 / 6.0) ** 4 * delta / (12.0 * epsilon ** 4)
    N_min = math.ceil(n_low)
    M_min = math.ceil(m_threshold(epsilon, n))
    K_min = math.ceil(k_threshold(N_min, delta))
    return ResourcePlan(
        epsilon, delta, n, M_min, N_min, n_high, K_min,
        feasible=N_min <= n_high,
        N_total_bob=N_min,
        N_total_alice=N_min * K_min * M_min,
    )


def corollary_plan(epsilon: float, delta: float, n: int) -> CorollaryPlan:
    """Median-of-means plan: P repetitions of a run sized for failure probability 1/3."""
    _check_unit("epsilon", epsilon)
    if not 0.0 < delta < COROLLARY_DELTA_MAX:
        raise ValueError(f"delta must lie in (0, {COROLLARY_DELTA_MAX}), got {delta}")
    if n < 1:
        raise ValueError("n must be >= 1")
    N = math.ceil(72.0 / epsilon ** 2)
    return CorollaryPlan(
        epsilon, delta, n,
        P=math.ceil(18.0 * math.log(1.0 / delta)),
        N=N,
        K=math.ceil(_K_COEFF * math.log(12.0 * N)),
        M=math.ceil(m_threshold(epsilon, n)),
    )


def theorem1_alice_scale(epsilon: float, delta: float, n: int) -> float:
    """``ln(1/eps^2) ln(1/delta) sqrt(d) / eps^4``: the asymptotic Alice cost without constants."""
    return math.log(1.0 / epsilon ** 2) * math.log(1.0 / delta) * math.sqrt(2 ** n) / epsilon ** 4


def qae_error_radius(a: float, M: int) -> float:
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    if M < 2:
        raise ValueError("M must be >= 2")
    return 2.0 * math.pi * math.sqrt(a * (1.0 - a)) / M + math.pi ** 2 / M ** 2


def hoeffding_bound(N: int, epsilon: float, range_width: float) -> float:
    """Two-sided bound on ``Pr(|sum - E sum| >= eps)`` for N variables of equal range width."""
    if N < 1 or epsilon <= 0 or range_width <= 0:
        raise ValueError("need N >= 1, epsilon > 0, range_width > 0")
    if math.isinf(epsilon):
        return 0.0
    return 2.0 * math.exp(-2.0 * epsilon ** 2 / (N * range_width ** 2))


def median_concentration_bound(N: int, delta: float) -> float:
    """``exp(-2 (1/2 - delta)^2 N)``: failure bound for a median of N trials each failing w.p. <= delta."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    return math.exp(-2.0 * (0.5 - delta) ** 2 * N)
