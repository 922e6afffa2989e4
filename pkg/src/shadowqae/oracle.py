"""Dense brute-force references for small qubit counts (test use).

Nothing here touches the tableau kernels' measurement or phase bookkeeping:
states are rebuilt by projecting onto the +1 eigenspace of every stabilizer
with plain matrix-free Pauli action on vectors.
"""

from __future__ import annotations

import numpy as np

from shadowqae.stabilizer import CliffordOp, PauliString, StabilizerState

MAX_ORACLE_QUBITS = 12


def _check_size(n: int) -> None:
    if n > MAX_ORACLE_QUBITS:
        raise ValueError(f"dense oracle limited to {MAX_ORACLE_QUBITS} qubits, got {n}")


def apply_pauli_masks(vec: np.ndarray, x: int, z: int, sign: complex = 1.0) -> np.ndarray:
    """``sign * P |vec>`` for the Hermitian Pauli with masks ``x``, ``z``."""
    d = vec.shape[0]
    idx = np.arange(d)
    zpar = np.array([bin(v).count("1") & 1 for v in (idx & z)]) if z else np.zeros(d, dtype=int)
    ny = bin(x & z).count("1")
    coeff = sign * (1j ** ny) * (1.0 - 2.0 * zpar)
    out = np.empty_like(vec, dtype=complex)
    out[idx ^ x] = coeff * vec
    return out


def apply_pauli_vec(vec: np.ndarray, p: PauliString) -> np.ndarray:
    return apply_pauli_masks(vec, p.x_bits, p.z_bits, 1j ** p.phase)


def _row_masks(state: StabilizerState, i: int) -> tuple[int, int, float]:
    w = 1 << np.arange(state.n)
    return int(state.x[i] @ w), int(state.z[i] @ w), -1.0 if state.r[i] else 1.0


def statevector_oracle(state: StabilizerState) -> np.ndarray:
    """Unit vector stabilized by every stabilizer row (global phase arbitrary)."""
    n = state.n
    _check_size(n)
    rng = np.random.default_rng(12345)
    d = 1 << n
    vec = rng.normal(size=d) + 1j * rng.normal(size=d)
    for i in range(n, 2 * n):
        x, z, s = _row_masks(state, i)
        vec = 0.5 * (vec + apply_pauli_masks(vec, x, z, s))
    norm = np.linalg.norm(vec)
    if norm < 1e-8:
        raise ValueError("stabilizer rows admit no common +1 eigenvector")
    vec = vec / norm
    # fix the global phase so the first sizeable entry is real positive
    k = int(np.argmax(np.abs(vec) > 1e-9))
    return vec * (abs(vec[k]) / vec[k])


def clifford_unitary(c: CliffordOp) -> np.ndarray:
    """Dense unitary (up to global phase) acting as ``c`` on Paulis.

    Column ``k`` is ``C X^k C^dag C|0>``: the image of ``X^k`` applied to the
    state stabilized by the images of ``Z_j``.
    """
    n = c.n
    _check_size(n)
    zero_image = StabilizerState(
        n, c.table[:, :n].copy(), c.table[:, n:].copy(), c.phase.copy()
    )
    base = statevector_oracle(zero_image)
    w = 1 << np.arange(n)
    xs = [int(c.table[j, :n] @ w) for j in range(n)]
    zs = [int(c.table[j, n:] @ w) for j in range(n)]
    signs = [-1.0 if c.phase[j] else 1.0 for j in range(n)]
    d = 1 << n
    u = np.zeros((d, d), dtype=complex)
    for k in range(d):
        v = base
        for j in range(n):
            if (k >> j) & 1:
                v = apply_pauli_masks(v, xs[j], zs[j], signs[j])
        u[:, k] = v
    return u


def ghz_vector(n: int) -> np.ndarray:
    _check_size(n)
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def pauli_matrix(p: PauliString) -> np.ndarray:
    d = 1 << p.n
    eye = np.eye(d, dtype=complex)
    return np.column_stack([apply_pauli_vec(eye[:, k], p) for k in range(d)])
