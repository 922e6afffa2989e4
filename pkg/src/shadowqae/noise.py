"""Noisy GHZ preparations as mixtures of stabilizer states.

Two models:

* ``PauliZGlobal(p)``: ``Z^{(x)n}`` hits the GHZ state with probability ``p``.
* ``CliffordTwirl(theta)``: the Clifford twirl of ``exp(i theta Z_1)``. Twirling
  a unitary channel over a 2-design gives the depolarizing map
  ``rho -> alpha rho + (1 - alpha) I/d`` with
  ``alpha = (|Tr U|^2 - 1)/(d^2 - 1) = (d^2 cos^2 theta - 1)/(d^2 - 1)``.
  Writing ``I/d`` as the uniform average of ``P psi P`` over all ``d^2``
  Paulis makes every branch a stabilizer state with a nonnegative weight,
  even where ``alpha < 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from shadowqae.stabilizer import PauliString, StabilizerState, apply_pauli, ghz_state


@dataclass(frozen=True)
class PauliZGlobal:
    n: int
    p: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def kind(self) -> str:
        return "pauli_z"

    @property
    def parameter(self) -> float:
        return self.p


@dataclass(frozen=True)
class CliffordTwirl:
    n: int
    theta: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.theta < 2 * math.pi:
            raise ValueError(f"theta must lie in [0, 2pi), got {self.theta}")

    @property
    def kind(self) -> str:
        return "twirl"

    @property
    def parameter(self) -> float:
        return self.theta

    @property
    def alpha(self) -> float:
        return twirl_alpha(self.n, self.theta)


NoiseModel = Union[PauliZGlobal, CliffordTwirl]


def noiseless(n: int) -> PauliZGlobal:
    return PauliZGlobal(n, 0.0)


def twirl_alpha(n: int, theta: float) -> float:
    d2 = 4.0 ** n
    return (d2 * math.cos(theta) ** 2 - 1.0) / (d2 - 1.0)


@dataclass(frozen=True)
class PreparationBranch:
    """One stabilizer component of the noisy preparation.

    ``label`` is ``"clean"``, ``"z_flip"`` or ``"pauli"``; ``pauli`` is the
    error applied to GHZ (identity for the clean branch) and ``weight`` its
    mixture weight (per individual Pauli for the ``"pauli"`` label).
    """

    label: str
    pauli: PauliString
    weight: float

    def state(self) -> StabilizerState:
        return apply_pauli(ghz_state(self.pauli.n), self.pauli)


def branch_weights(model: NoiseModel) -> tuple[float, float]:
    """``(clean weight, weight of each non-identity error branch)``."""
    if isinstance(model, PauliZGlobal):
        return 1.0 - model.p, model.p
    d2 = 4.0 ** model.n
    alpha = model.alpha
    per_pauli = (1.0 - alpha) / d2
    clean = alpha + per_pauli
    # alpha >= -1/(d^2-1) keeps both nonnegative; tiny negatives are rounding
    if clean < -1e-12 or per_pauli < -1e-12:
        raise ArithmeticError(f"negative mixture weight for {model}")
    return max(clean, 0.0), max(per_pauli, 0.0)


def error_probability(model: NoiseModel) -> float:
    """Total probability of landing in a non-clean branch."""
    clean, per = branch_weights(model)
    if isinstance(model, PauliZGlobal):
        return per
    return min(1.0, per * (4.0 ** model.n - 1.0))


def draw_errors(model: NoiseModel, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Batched branch draws as Pauli masks, shape ``(size, n)`` each.

    Always consumes one uniform and one integer per shot so the stream layout
    does not depend on the model parameters.
    """
    n = model.n
    u = rng.random(size)
    pick = rng.integers(1, 4 ** n, size=size, dtype=np.int64)
    hit = u < error_probability(model)
    bitpos = np.arange(n)
    if isinstance(model, PauliZGlobal):
        px = np.zeros((size, n), dtype=np.uint8)
        pz = np.repeat(hit[:, None], n, axis=1).astype(np.uint8)
        return px, pz
    xs = np.where(hit, pick & ((1 << n) - 1), 0)
    zs = np.where(hit, pick >> n, 0)
    px = ((xs[:, None] >> bitpos) & 1).astype(np.uint8)
    pz = ((zs[:, None] >> bitpos) & 1).astype(np.uint8)
    return px, pz


def sample_branch(model: NoiseModel, rng: np.random.Generator) -> PreparationBranch:
    px, pz = draw_errors(model, rng, 1)
    n = model.n
    w = 1 << np.arange(n)
    pauli = PauliString(n, int(px[0] @ w), int(pz[0] @ w))
    clean, per = branch_weights(model)
    if pauli.is_identity():
        return PreparationBranch("clean", pauli, clean)
    label = "z_flip" if isinstance(model, PauliZGlobal) else "pauli"
    return PreparationBranch(label, pauli, per)


def true_fidelity(model: NoiseModel) -> float:
    """``<GHZ| rho |GHZ>`` for the model's mixed state."""
    n = model.n
    if isinstance(model, PauliZGlobal):
        overlap = 1.0 if n % 2 == 0 else 0.0
        return 1.0 - model.p * (1.0 - overlap ** 2)
    alpha = model.alpha
    return alpha + (1.0 - alpha) / 2.0 ** n


def density_matrix(model: NoiseModel) -> np.ndarray:
    """Dense mixture of the branches (small ``n`` only)."""
    from shadowqae.oracle import apply_pauli_masks, ghz_vector

    n = model.n
    if n > 6:
        raise ValueError("dense density matrix limited to n <= 6")
    psi = ghz_vector(n)
    clean, per = branch_weights(model)
    rho = clean * np.outer(psi, psi.conj())
    if isinstance(model, PauliZGlobal):
        v = apply_pauli_masks(psi, 0, (1 << n) - 1)
        return rho + per * np.outer(v, v.conj())
    for idx in range(1, 4 ** n):
        v = apply_pauli_masks(psi, idx & ((1 << n) - 1), idx >> n)
        rho += per * np.outer(v, v.conj())
    return rho
