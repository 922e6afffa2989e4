"""End-to-end protocol simulation and the experiments built on it.

Bob: for each of N snapshots, draw a preparation branch of his noisy GHZ
state, rotate it by a uniformly random Clifford and measure every qubit.
Alice: for each record ``(C, b)``, compute ``a = |<b|C|GHZ>|^2`` exactly, then
either use it directly (``amplitude_mode="exact"``) or replace it by the median
of K amplitude-estimation readouts drawn from the truncated closed-form law.

Randomness: every repetition ``rep`` and sub-run ``p`` gets its own generator
keyed by ``(master_seed, rep, p, role)`` through ``SeedSequence`` spawn keys,
so results do not depend on scheduling or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from shadowqae import _kernels
from shadowqae.estimators import AGGREGATORS, RunEstimate, ShadowRecord, run_estimate_from_medians
from shadowqae.noise import CliffordTwirl, NoiseModel, PauliZGlobal, draw_errors, true_fidelity
from shadowqae.qae import DEFAULT_MASS_FLOOR, QaeGrid, truncated_distribution
from shadowqae.stabilizer import CliffordOp, StabilizerState, clifford_randomness, ghz_state

DEFAULT_SEED = 20240601
AMPLITUDE_MODES = ("qae", "exact")

BOB, ALICE = 0, 1


def make_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-based child generator: the stream depends only on ``(master_seed, key)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=key)))


def derive_seed(master_seed: int, *key: int) -> int:
    """A 64-bit child seed, used to give independent experiments their own master seed."""
    return int(np.random.SeedSequence(master_seed, spawn_key=key).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ProtocolConfig:
    n: int = 9
    N: int = 1000
    M: int = 512
    K: int = 10
    P: int = 1
    noise: NoiseModel | None = None
    amplitude_mode: str = "qae"
    aggregation: str = "median-of-means"
    master_seed: int = DEFAULT_SEED
    mass_floor: float = DEFAULT_MASS_FLOOR

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for name in ("N", "K", "P"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.amplitude_mode not in AMPLITUDE_MODES:
            raise ValueError(f"amplitude_mode must be one of {AMPLITUDE_MODES}")
        if self.aggregation not in AGGREGATORS:
            raise ValueError(f"aggregation must be one of {tuple(AGGREGATORS)}")
        if self.amplitude_mode == "qae":
            QaeGrid.from_iterations(self.M)
        if self.noise is None:
            object.__setattr__(self, "noise", PauliZGlobal(self.n, 0.0))
        if self.noise.n != self.n:
            raise ValueError("noise model qubit count differs from n")

    def replace(self, **changes) -> "ProtocolConfig":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        if "n" in changes and "noise" not in changes:
            fields["noise"] = type(self.noise)(changes["n"], self.noise.parameter)
        return ProtocolConfig(**fields)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "noise"}
        out["noise"] = {"model": self.noise.kind, "param": self.noise.parameter}
        return out


@dataclass(eq=False)
class ShadowBatch:
    """Bob's records for one run, stored as arrays.

    ``tables[i]``/``phases[i]`` define the Clifford ``C_i`` and ``outcomes[i]``
    the measured bit string.
    """

    n: int
    tables: np.ndarray
    phases: np.ndarray
    outcomes: np.ndarray

    def __len__(self) -> int:
        return self.outcomes.shape[0]

    def record(self, i: int) -> ShadowRecord:
        return ShadowRecord(CliffordOp(self.n, self.tables[i], self.phases[i]), int(self.outcomes[i]))

    def records(self) -> list[ShadowRecord]:
        return [self.record(i) for i in range(len(self))]

    @classmethod
    def from_records(cls, records: Sequence[ShadowRecord]) -> "ShadowBatch":
        if not records:
            raise ValueError("no shadow records")
        n = records[0].clifford.n
        return cls(
            n,
            np.stack([r.clifford.table for r in records]),
            np.stack([r.clifford.phase for r in records]),
            np.array([r.outcome for r in records], dtype=np.int64),
        )


@dataclass
class FidelityEstimate:
    estimate: float
    runs: list[float]
    config: ProtocolConfig
    repetition: int = 0


@dataclass
class EnsembleResult:
    estimates: np.ndarray
    mean: float
    std: float
    gaussian_fit: tuple[float, float]
    true_fidelity: float
    config: ProtocolConfig

    @property
    def repetitions(self) -> int:
        return int(self.estimates.size)

    @property
    def sem(self) -> float:
        return self.std / math.sqrt(self.repetitions)


@dataclass
class ScalingResult:
    n_values: list[int]
    M_grid: list[int]
    selected_M: dict[int, int | None]
    alpha: float | None
    beta: float | None
    means: dict[int, list[float]]
    stds: dict[int, list[float]]
    true_fidelity: dict[int, float]
    criterion: dict = field(default_factory=dict)

    @property
    def resolved(self) -> list[int]:
        return [n for n in self.n_values if self.selected_M.get(n) is not None]


def _ghz_arrays(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    g = ghz_state(n)
    return g.x, g.z, g.r


def bob_phase(noise: NoiseModel, n: int, N: int, rng: np.random.Generator) -> ShadowBatch:
    """Classical shadows of the noisy GHZ preparation: N (Clifford, outcome) records."""
    if noise.n != n:
        raise ValueError("noise model qubit count differs from n")
    if N < 1:
        raise ValueError("N must be >= 1")
    u, bits, phases = clifford_randomness(n, rng, size=N)
    px, pz = draw_errors(noise, rng, N)
    coins = rng.integers(0, 2, size=(N, n), dtype=np.uint8)
    x, z, r = _ghz_arrays(n)
    tables, outcomes = _kernels.shadow_batch(x, z, r, u, bits, phases, px, pz, coins)
    return ShadowBatch(n, tables, phases, outcomes)


def exact_amplitudes(records: ShadowBatch | Sequence[ShadowRecord], target: StabilizerState | None = None) -> np.ndarray:
    """``|<b_i|C_i|psi>|^2`` for each record; ``psi`` defaults to GHZ."""
    batch = records if isinstance(records, ShadowBatch) else ShadowBatch.from_records(records)
    target = ghz_state(batch.n) if target is None else target
    k = _kernels.amplitude_batch(target.x, target.z, target.r, batch.tables, batch.phases, batch.outcomes)
    return np.where(k < 0, 0.0, np.ldexp(1.0, -np.maximum(k, 0)))


def qae_medians(amplitudes: np.ndarray, M: int, K: int, rng: np.random.Generator,
                mass_floor: float = DEFAULT_MASS_FLOOR) -> np.ndarray:
    """Median of K sampled amplitude estimates for every entry of ``amplitudes``.

    Draws are made per distinct amplitude value in ascending order, which keeps
    the RNG stream layout deterministic.
    """
    QaeGrid.from_iterations(M)
    out = np.empty(amplitudes.shape[0], dtype=float)
    values, inverse = np.unique(amplitudes, return_inverse=True)
    for idx, a in enumerate(values):
        rows = np.flatnonzero(inverse == idx)
        dist = truncated_distribution(float(a), int(M), mass_floor)
        u = rng.random((rows.size, K))
        pos = np.minimum(np.searchsorted(dist.cdf, u, side="right"), dist.support.size - 1)
        est = _estimate_table(int(M))[dist.support[pos]]
        out[rows] = np.median(est, axis=1)
    return out


@lru_cache(maxsize=64)
def _estimate_table(M: int) -> np.ndarray:
    return np.sin(np.pi * np.arange(M) / M) ** 2


def alice_phase(records: ShadowBatch | Sequence[ShadowRecord], config: ProtocolConfig,
                rng: np.random.Generator) -> RunEstimate:
    """Fidelity estimate for one run from Bob's records."""
    batch = records if isinstance(records, ShadowBatch) else ShadowBatch.from_records(records)
    if len(batch) == 0:
        raise ValueError("no shadow records")
    amps = exact_amplitudes(batch)
    if config.amplitude_mode == "exact":
        medians = amps
    else:
        medians = qae_medians(amps, config.M, config.K, rng, config.mass_floor)
    return run_estimate_from_medians(medians, batch.n, M=config.M, K=config.K)


def run_protocol(config: ProtocolConfig, repetition: int = 0) -> FidelityEstimate:
    """P independent runs aggregated per ``config.aggregation``."""
    runs = []
    for p in range(config.P):
        records = bob_phase(config.noise, config.n, config.N, make_rng(config.master_seed, repetition, p, BOB))
        runs.append(alice_phase(records, config, make_rng(config.master_seed, repetition, p, ALICE)).f_hat)
    estimate = AGGREGATORS[config.aggregation](runs)
    return FidelityEstimate(estimate, runs, config, repetition)


def _map_indexed(fn, items: Iterable, workers: int) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so aggregation never depends on completion order
        return list(pool.map(fn, items))


def gaussian_fit(values: np.ndarray) -> tuple[float, float]:
    """Moment-matched normal: (center, width) = (mean, population std)."""
    v = np.asarray(values, dtype=float)
    return float(np.mean(v)), float(np.std(v))


def run_ensemble(config: ProtocolConfig, repetitions: int, workers: int = 1) -> EnsembleResult:
    if repetitions < 2:
        raise ValueError("an ensemble needs at least 2 repetitions")
    estimates = np.array(
        _map_indexed(lambda rep: run_protocol(config, rep).estimate, range(repetitions), workers)
    )
    return EnsembleResult(
        estimates=estimates,
        mean=float(np.mean(estimates)),
        std=float(np.std(estimates, ddof=1)),
        gaussian_fit=gaussian_fit(estimates),
        true_fidelity=true_fidelity(config.noise),
        config=config,
    )


def m_sweep(config: ProtocolConfig, M_grid: Sequence[int], repetitions: int,
            workers: int = 1) -> np.ndarray:
    """Run estimates for every (M, repetition), shape ``(len(M_grid), repetitions)``.

    Each repetition's shadow records and exact amplitudes are shared across
    the M grid; only Alice's readouts are redrawn per M.
    """
    grid = [int(M) for M in M_grid]
    for M in grid:
        QaeGrid.from_iterations(M)
    d1 = 2 ** config.n + 1

    def one(rep: int) -> np.ndarray:
        records = bob_phase(config.noise, config.n, config.N, make_rng(config.master_seed, rep, 0, BOB))
        amps = exact_amplitudes(records)
        row = np.empty(len(grid))
        for i, M in enumerate(grid):
            if config.amplitude_mode == "exact":
                med = amps
            else:
                med = qae_medians(amps, M, config.K, make_rng(config.master_seed, rep, 0, ALICE, i),
                                  config.mass_floor)
            row[i] = d1 * float(np.mean(med)) - 1.0
        return row

    return np.array(_map_indexed(one, range(repetitions), workers)).T


def select_M(M_grid: Sequence[int], means: Sequence[float], bars: Sequence[float],
             target: float, accuracy: float) -> int | None:
    """First M for which a strict majority of larger grid values sit inside the strip.

    A grid value is inside when ``[mean - bar, mean + bar]`` lies within
    ``[target - accuracy, target + accuracy]``.
    """
    inside = [
        (mu - e >= target - accuracy) and (mu + e <= target + accuracy)
        for mu, e in zip(means, bars)
    ]
    for i, M in enumerate(M_grid):
        later = inside[i + 1:]
        if later and 2 * sum(later) > len(later):
            return int(M)
    return None


def fit_power_law(d_values: Sequence[float], M_values: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit of ``log M = log alpha + beta log d``; returns ``(alpha, beta)``."""
    if len(d_values) < 3:
        raise ValueError("power-law fit needs at least 3 points")
    beta, log_alpha = np.polyfit(np.log(d_values), np.log(M_values), 1)
    return float(math.exp(log_alpha)), float(beta)


def m_scaling_experiment(
    n_values: Sequence[int],
    accuracy: float = 0.02,
    N: int = 1000,
    K: int = 10,
    M_grid: Sequence[int] = tuple(2 ** k for k in range(2, 12)),
    repetitions: int = 100,
    p: float = 0.1,
    error_bar: str = "sem",
    amplitude_mode: str = "qae",
    master_seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> ScalingResult:
    """Smallest adequate M per qubit count under Pauli-Z noise, and the fit ``M = alpha d^beta``.

    ``error_bar`` is ``"std"`` (spread of single runs) or ``"sem"`` (standard
    error of the ensemble mean).
    """
    n_values = [int(n) for n in n_values]
    grid = [int(M) for M in M_grid]
    if len(n_values) < 3:
        raise ValueError("scaling experiment needs at least 3 qubit counts")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("M_grid must be strictly ascending")
    if error_bar not in ("std", "sem"):
        raise ValueError("error_bar must be 'std' or 'sem'")

    selected, means, stds, truth = {}, {}, {}, {}
    for idx, n in enumerate(n_values):
        cfg = ProtocolConfig(
            n=n, N=N, K=K, M=grid[0], noise=PauliZGlobal(n, p),
            amplitude_mode=amplitude_mode, master_seed=master_seed,
        )
        # per-n stream: mix n into the seed key so adding qubit counts leaves others unchanged
        cfg = cfg.replace(master_seed=derive_seed(master_seed, n))
        est = m_sweep(cfg, grid, repetitions, workers)
        mu = est.mean(axis=1)
        sd = est.std(axis=1, ddof=1)
        bars = sd if error_bar == "std" else sd / math.sqrt(repetitions)
        truth[n] = true_fidelity(cfg.noise)
        means[n] = mu.tolist()
        stds[n] = sd.tolist()
        selected[n] = select_M(grid, mu, bars, truth[n], accuracy)

    resolved = [n for n in n_values if selected[n] is not None]
    alpha = beta = None
    if len(resolved) >= 3:
        alpha, beta = fit_power_law([2.0 ** n for n in resolved], [selected[n] for n in resolved])
    return ScalingResult(
        n_values=n_values, M_grid=grid, selected_M=selected, alpha=alpha, beta=beta,
        means=means, stds=stds, true_fidelity=truth,
        criterion={
            "accuracy": accuracy, "error_bar": error_bar, "rule": "strict-majority-of-larger-M",
            "N": N, "K": K, "p": p, "repetitions": repetitions, "amplitude_mode": amplitude_mode,
        },
    )
