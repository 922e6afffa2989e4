"""Stabilizer states, Clifford operators and Pauli strings.

States are tracked by an Aaronson-Gottesman tableau (destabilizers plus
stabilizers, with signs); global phase is never tracked because every
consumer only needs ``|<b|state>|^2``.

Bit strings are plain integers: qubit ``j`` carries weight ``2**j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from shadowqae import _kernels
from shadowqae.gf2 import gf2_rank

_PAULI_CHARS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"qubit count must be a positive integer, got {n!r}")


@dataclass(frozen=True)
class PauliString:
    """``i**phase`` times a tensor product of I, X, Y, Z.

    ``x_bits`` and ``z_bits`` are integer masks; qubit ``j`` holds ``Y`` when
    both bit ``j`` of ``x_bits`` and of ``z_bits`` are set.
    """

    n: int
    x_bits: int
    z_bits: int
    phase: int = 0

    def __post_init__(self):
        _check_n(self.n)
        limit = 1 << self.n
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise ValueError("Pauli masks exceed the qubit count")
        if self.phase not in (0, 1, 2, 3):
            raise ValueError("phase must be 0, 1, 2 or 3 (powers of i)")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels like ``"XYZ"``, ``"-ZZ"``, ``"+iX"``; leftmost char is qubit 0."""
        phase = 0
        for prefix, p in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2)):
            if label.startswith(prefix):
                phase = p
                label = label[len(prefix):]
                break
        x = z = 0
        for j, ch in enumerate(label.upper()):
            if ch in "XY":
                x |= 1 << j
            if ch in "ZY":
                z |= 1 << j
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli character {ch!r}")
        return cls(len(label), x, z, phase)

    @classmethod
    def z_all(cls, n: int) -> "PauliString":
        return cls(n, 0, (1 << n) - 1)

    @classmethod
    def x_all(cls, n: int) -> "PauliString":
        return cls(n, (1 << n) - 1, 0)

    def x_array(self) -> np.ndarray:
        return ((self.x_bits >> np.arange(self.n)) & 1).astype(np.uint8)

    def z_array(self) -> np.ndarray:
        return ((self.z_bits >> np.arange(self.n)) & 1).astype(np.uint8)

    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def __str__(self) -> str:
        body = "".join(
            _PAULI_CHARS[(self.x_bits >> j) & 1, (self.z_bits >> j) & 1] for j in range(self.n)
        )
        return _PHASE_PREFIX[self.phase] + body


def _row_to_str(x: np.ndarray, z: np.ndarray, r: int) -> str:
    return ("-" if r else "+") + "".join(_PAULI_CHARS[int(a), int(b)] for a, b in zip(x, z))


@dataclass(eq=False)
class StabilizerState:
    """Pure n-qubit stabilizer state.

    ``x``, ``z`` are ``(2n, n)`` uint8 bit arrays and ``r`` the ``(2n,)`` sign
    bits; rows ``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers.
    """

    n: int
    x: np.ndarray
    z: np.ndarray
    r: np.ndarray

    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        """The all-zeros computational basis state."""
        _check_n(n)
        eye = np.eye(n, dtype=np.uint8)
        zeros = np.zeros((n, n), dtype=np.uint8)
        return cls(
            n,
            np.vstack([eye, zeros]),
            np.vstack([zeros, eye]),
            np.zeros(2 * n, dtype=np.uint8),
        )

    def copy(self) -> "StabilizerState":
        return StabilizerState(self.n, self.x.copy(), self.z.copy(), self.r.copy())

    def stabilizers(self) -> list[str]:
        n = self.n
        return [_row_to_str(self.x[i], self.z[i], self.r[i]) for i in range(n, 2 * n)]

    def destabilizers(self) -> list[str]:
        return [_row_to_str(self.x[i], self.z[i], self.r[i]) for i in range(self.n)]

    def symplectic_matrix(self) -> np.ndarray:
        return np.hstack([self.x, self.z])

    def is_valid(self) -> bool:
        """Commutation structure of a full tableau and rank 2n over GF(2)."""
        n = self.n
        m = self.symplectic_matrix().astype(np.int64)
        omega = np.block(
            [[np.zeros((n, n), dtype=np.int64), np.eye(n, dtype=np.int64)],
             [np.eye(n, dtype=np.int64), np.zeros((n, n), dtype=np.int64)]]
        )
        comm = (m @ omega @ m.T) % 2
        expected = np.block(
            [[comm[:n, :n], np.eye(n, dtype=np.int64)],
             [np.eye(n, dtype=np.int64), np.zeros((n, n), dtype=np.int64)]]
        )
        return bool(np.array_equal(comm, expected) and gf2_rank(m) == 2 * n)

    def same_stabilizer_group(self, other: "StabilizerState") -> bool:
        """True when both tableaus describe the same state (same signed stabilizer group)."""
        if self.n != other.n:
            return False
        for i in range(other.n, 2 * other.n):
            sign = _membership_sign(self, other.x[i], other.z[i])
            if sign is None or sign != int(other.r[i]):
                return False
        return True

    # in-place elementary gates, used for state preparation
    def h(self, q: int) -> "StabilizerState":
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()
        return self

    def s(self, q: int) -> "StabilizerState":
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]
        return self

    def cx(self, c: int, t: int) -> "StabilizerState":
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]
        return self


def _membership_sign(state: StabilizerState, px: np.ndarray, pz: np.ndarray) -> int | None:
    """Sign bit ``s`` with ``(-1)^s P`` in the stabilizer group, or None if ``+-P`` is not in it."""
    n = state.n
    # P commutes with all stabilizers iff it is in the group (up to sign);
    # its decomposition uses stabilizer i exactly when P anticommutes with destabilizer i.
    for i in range(n, 2 * n):
        if (int(np.sum(state.x[i] & pz)) + int(np.sum(state.z[i] & px))) % 2:
            return None
    x = np.vstack([state.x[n:], np.zeros((1, n), dtype=np.uint8)])
    z = np.vstack([state.z[n:], np.zeros((1, n), dtype=np.uint8)])
    r = np.concatenate([state.r[n:], np.zeros(1, dtype=np.uint8)])
    for i in range(n):
        if (int(np.sum(state.x[i] & pz)) + int(np.sum(state.z[i] & px))) % 2:
            _kernels.rowsum(x, z, r, n, i)
    if not (np.array_equal(x[n], px) and np.array_equal(z[n], pz)):
        return None
    return int(r[n])


@dataclass
class CliffordOp:
    """Clifford unitary modulo global phase, stored by its action on Paulis.

    ``table[j]`` is the image of ``X_j`` and ``table[n + j]`` the image of
    ``Z_j``, each as ``[x bits | z bits]``; ``phase[k]`` is the sign bit of
    image ``k``.
    """

    n: int
    table: np.ndarray
    phase: np.ndarray = field(default=None)

    def __post_init__(self):
        _check_n(self.n)
        self.table = np.asarray(self.table, dtype=np.uint8)
        if self.phase is None:
            self.phase = np.zeros(2 * self.n, dtype=np.uint8)
        self.phase = np.asarray(self.phase, dtype=np.uint8)
        if self.table.shape != (2 * self.n, 2 * self.n) or self.phase.shape != (2 * self.n,):
            raise ValueError("Clifford table shape does not match qubit count")

    @classmethod
    def identity(cls, n: int) -> "CliffordOp":
        return cls(n, np.eye(2 * n, dtype=np.uint8))

    def is_symplectic(self) -> bool:
        n = self.n
        m = self.table.astype(np.int64)
        omega = np.block(
            [[np.zeros((n, n), dtype=np.int64), np.eye(n, dtype=np.int64)],
             [np.eye(n, dtype=np.int64), np.zeros((n, n), dtype=np.int64)]]
        )
        return bool(np.array_equal((m @ omega @ m.T) % 2, omega))

    def conjugate(self, p: PauliString) -> PauliString:
        """``C P C^dag`` (the input phase is carried through)."""
        if p.n != self.n:
            raise ValueError("dimension mismatch")
        ox, oz, orr = _kernels.conjugate_rows(
            p.x_array()[None, :], p.z_array()[None, :], np.zeros(1, dtype=np.uint8),
            self.table, self.phase,
        )
        weights = 1 << np.arange(self.n)
        return PauliString(
            self.n, int(ox[0] @ weights), int(oz[0] @ weights), (p.phase + 2 * int(orr[0])) % 4
        )

    def then(self, other: "CliffordOp") -> "CliffordOp":
        """The operator ``other * self`` (apply ``self`` first)."""
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        n = self.n
        ox, oz, orr = _kernels.conjugate_rows(
            self.table[:, :n], self.table[:, n:], self.phase, other.table, other.phase
        )
        return CliffordOp(n, np.hstack([ox, oz]), orr)

    def inverse(self) -> "CliffordOp":
        n = self.n
        m = self.table
        # symplectic inverse: Omega M^T Omega
        inv = np.block([[m[n:, n:].T, m[:n, n:].T], [m[n:, :n].T, m[:n, :n].T]]).astype(np.uint8)
        candidate = CliffordOp(n, inv)
        # signs of self(candidate(g)) tell which generator images need flipping
        check = candidate.then(self)
        return CliffordOp(n, inv, check.phase.copy())

    def key(self) -> bytes:
        """Hashable identity of the group element (mod global phase)."""
        return self.table.tobytes() + self.phase.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordOp):
            return NotImplemented
        return self.n == other.n and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def clifford_randomness(n: int, rng: np.random.Generator, size: int | None = None):
    """Draw the raw random inputs consumed by one (or ``size``) Clifford samples."""
    shape = () if size is None else (size,)
    u = rng.random(shape + (n,))
    bits = rng.integers(0, 2, size=shape + (4, n, n), dtype=np.uint8)
    phase = rng.integers(0, 2, size=shape + (2 * n,), dtype=np.uint8)
    return u, bits, phase


def random_clifford(n: int, rng: np.random.Generator) -> CliffordOp:
    """Uniformly random n-qubit Clifford (modulo global phase)."""
    _check_n(n)
    u, bits, phase = clifford_randomness(n, rng)
    return CliffordOp(n, _kernels.build_clifford(n, u, bits), phase)


def ghz_state(n: int) -> StabilizerState:
    """``(|0...0> + |1...1>)/sqrt(2)``; for ``n = 1`` this is ``|+>``."""
    _check_n(n)
    state = StabilizerState.zero(n).h(0)
    for t in range(1, n):
        state.cx(0, t)
    return state


def apply_clifford(state: StabilizerState, c: CliffordOp) -> StabilizerState:
    if state.n != c.n:
        raise ValueError(f"dimension mismatch: state has {state.n} qubits, Clifford {c.n}")
    x, z, r = _kernels.conjugate_rows(state.x, state.z, state.r, c.table, c.phase)
    return StabilizerState(state.n, x, z, r)


def apply_pauli(state: StabilizerState, p: PauliString) -> StabilizerState:
    if state.n != p.n:
        raise ValueError(f"dimension mismatch: state has {state.n} qubits, Pauli {p.n}")
    out = state.copy()
    _kernels.pauli_flip_signs(out.x, out.z, out.r, p.x_array(), p.z_array())
    return out


def measure_all(state: StabilizerState, rng: np.random.Generator) -> int:
    """Sample a computational-basis outcome; the input state is left untouched."""
    work = state.copy()
    coins = rng.integers(0, 2, size=state.n, dtype=np.uint8)
    return int(_kernels.measure_all(work.x, work.z, work.r, coins))


def amplitude_log2(state: StabilizerState, b: int) -> int | None:
    """``k`` with ``|<b|state>|^2 = 2**-k``, or None when the overlap is zero."""
    if not 0 <= b < (1 << state.n):
        raise ValueError(f"bit string {b} out of range for {state.n} qubits")
    work = state.copy()
    k = int(_kernels.postselect(work.x, work.z, work.r, b))
    return None if k < 0 else k


def amplitude_sq(state: StabilizerState, b: int) -> float:
    """Exact ``|<b|state>|^2``; always 0 or a power of 1/2."""
    k = amplitude_log2(state, b)
    return 0.0 if k is None else 2.0 ** -k
