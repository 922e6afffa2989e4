from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import H1, S1, dense_1q, dense_cx
from shadowqae.gf2 import gf2_rank
from shadowqae.oracle import (
    apply_pauli_vec,
    clifford_unitary,
    ghz_vector,
    pauli_matrix,
    statevector_oracle,
)
from shadowqae.stabilizer import (
    CliffordOp,
    PauliString,
    StabilizerState,
    amplitude_sq,
    apply_clifford,
    apply_pauli,
    ghz_state,
    measure_all,
    random_clifford,
)


def random_circuit(n: int, depth: int, rng):
    ops = []
    for _ in range(depth):
        kind = rng.integers(3) if n > 1 else rng.integers(2)
        if kind == 2:
            c, t = rng.choice(n, size=2, replace=False)
            ops.append(("cx", int(c), int(t)))
        else:
            ops.append(("h" if kind == 0 else "s", int(rng.integers(n))))
    return ops


def run_tableau(n, ops):
    st_ = StabilizerState.zero(n)
    for op in ops:
        getattr(st_, op[0])(*op[1:])
    return st_


def run_dense(n, ops):
    v = np.zeros(1 << n, dtype=complex)
    v[0] = 1
    for op in ops:
        if op[0] == "cx":
            v = dense_cx(v, op[1], op[2], n)
        else:
            v = dense_1q(v, H1 if op[0] == "h" else S1, op[1], n)
    return v


def probs_from_tableau(state):
    return np.array([amplitude_sq(state, b) for b in range(1 << state.n)])


class TestPauliString:
    def test_label_roundtrip(self):
        for label in ("+XYZI", "-ZZ", "+iX", "-iYY"):
            assert str(PauliString.from_label(label)) == label

    def test_leftmost_is_qubit_zero(self):
        p = PauliString.from_label("XI")
        assert p.x_bits == 1 and p.z_bits == 0

    def test_rejects_bad_masks(self):
        with pytest.raises(ValueError):
            PauliString(2, 4, 0)
        with pytest.raises(ValueError):
            PauliString(2, 0, 0, phase=5)
        with pytest.raises(ValueError):
            PauliString.from_label("XQ")


class TestGhz:
    def test_one_qubit_is_plus(self):
        s = ghz_state(1)
        assert s.stabilizers() == ["+X"]

    def test_generators(self):
        s = ghz_state(4)
        assert s.same_stabilizer_group(s)
        for label in ("XXXX", "ZZII", "IZZI", "IIZZ"):
            p = PauliString.from_label(label)
            v = statevector_oracle(s)
            assert np.allclose(apply_pauli_vec(v, p), v)

    def test_amplitudes(self):
        s = ghz_state(3)
        assert amplitude_sq(s, 0b000) == 0.5
        assert amplitude_sq(s, 0b111) == 0.5
        assert amplitude_sq(s, 0b010) == 0.0

    def test_dense_matches_n8(self):
        v = statevector_oracle(ghz_state(8))
        assert np.allclose(v, ghz_vector(8), atol=1e-12)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            ghz_state(0)


class TestOracle:
    def test_small_vectors(self):
        assert np.allclose(statevector_oracle(StabilizerState.zero(2)), [1, 0, 0, 0])
        assert np.allclose(statevector_oracle(ghz_state(2)), [2 ** -0.5, 0, 0, 2 ** -0.5])

    def test_stabilizer_rows_fix_vector(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 6))
            s = apply_clifford(ghz_state(n), random_clifford(n, rng))
            v = statevector_oracle(s)
            assert np.isclose(np.linalg.norm(v), 1.0)
            for label in s.stabilizers():
                p = PauliString.from_label(label)
                assert np.allclose(apply_pauli_vec(v, p), v, atol=1e-10)


class TestGateCircuits:
    """Tableau gates against an independent dense simulation."""

    def test_random_circuits_match_dense(self, rng):
        for _ in range(60):
            n = int(rng.integers(1, 6))
            ops = random_circuit(n, 25, rng)
            s = run_tableau(n, ops)
            dense = np.abs(run_dense(n, ops)) ** 2
            assert np.array_equal(probs_from_tableau(s), np.round(dense, 12))
            assert s.is_valid()


class TestCliffordOp:
    def test_identity_leaves_state(self, rng):
        s = ghz_state(4)
        out = apply_clifford(s, CliffordOp.identity(4))
        assert np.array_equal(out.x, s.x) and np.array_equal(out.r, s.r)

    def test_inverse_roundtrip(self, rng):
        for n in range(1, 7):
            c = random_clifford(n, rng)
            s = ghz_state(n)
            back = apply_clifford(apply_clifford(s, c), c.inverse())
            assert back.same_stabilizer_group(s)
            assert c.then(c.inverse()) == CliffordOp.identity(n)

    def test_symplectic_samples(self, rng):
        for _ in range(200):
            assert random_clifford(2, rng).is_symplectic()

    def test_dense_conjugation(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 5))
            c = random_clifford(n, rng)
            u = clifford_unitary(c)
            assert np.allclose(u.conj().T @ u, np.eye(1 << n), atol=1e-10)
            p = PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)))
            assert np.allclose(u @ pauli_matrix(p) @ u.conj().T, pauli_matrix(c.conjugate(p)), atol=1e-10)

    def test_amplitudes_match_dense(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 7))
            c = random_clifford(n, rng)
            s = apply_clifford(ghz_state(n), c)
            dense = np.abs(clifford_unitary(c) @ ghz_vector(n)) ** 2
            assert np.array_equal(probs_from_tableau(s), np.round(dense, 12))

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            apply_clifford(ghz_state(2), random_clifford(3, rng))


class TestUniformSampling:
    def test_one_qubit_chi_square(self):
        rng = np.random.default_rng(2024)
        counts = Counter(random_clifford(1, rng).key() for _ in range(100_000))
        assert len(counts) == 24
        _, pval = stats.chisquare(list(counts.values()))
        assert pval > 1e-3

    def test_one_design(self, rng):
        # mean of |<b|C|0>|^2 over random C is 1/2^n for any fixed b
        n, shots, b = 3, 20_000, 0b101
        vals = np.array([amplitude_sq(apply_clifford(StabilizerState.zero(n), random_clifford(n, rng)), b)
                         for _ in range(shots)])
        se = vals.std(ddof=1) / np.sqrt(shots)
        assert abs(vals.mean() - 1 / 2 ** n) < 5 * se


class TestPauliAction:
    def test_even_z_on_ghz(self):
        s = ghz_state(2)
        out = apply_pauli(s, PauliString.z_all(2))
        assert out.stabilizers() == s.stabilizers()

    def test_odd_z_on_ghz(self):
        s = ghz_state(3)
        flipped = apply_pauli(s, PauliString.z_all(3))
        assert amplitude_sq(flipped, 0) == 0.5
        overlap = np.vdot(ghz_vector(3), statevector_oracle(flipped))
        assert abs(overlap) < 1e-12

    def test_x_all_stabilizes(self):
        for n in range(1, 7):
            s = ghz_state(n)
            assert apply_pauli(s, PauliString.x_all(n)).same_stabilizer_group(s)

    def test_matches_dense(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 5))
            s = apply_clifford(ghz_state(n), random_clifford(n, rng))
            p = PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)))
            want = apply_pauli_vec(statevector_oracle(s), p)
            got = statevector_oracle(apply_pauli(s, p))
            assert np.isclose(abs(np.vdot(want, got)), 1.0)


class TestMeasurement:
    def test_zero_state(self, rng):
        assert all(measure_all(StabilizerState.zero(4), rng) == 0 for _ in range(50))

    def test_ghz3_frequencies(self, rng):
        shots = 20_000
        out = Counter(measure_all(ghz_state(3), rng) for _ in range(shots))
        assert set(out) == {0, 7}
        assert abs(out[0] / shots - 0.5) < 3 * 0.5 / np.sqrt(shots)

    def test_total_variation_against_dense(self):
        rng = np.random.default_rng(99)
        n, shots = 5, 100_000
        c = random_clifford(n, rng)
        s = apply_clifford(ghz_state(n), c)
        truth = np.abs(clifford_unitary(c) @ ghz_vector(n)) ** 2
        freq = np.bincount([measure_all(s, rng) for _ in range(shots)], minlength=1 << n) / shots
        assert 0.5 * np.abs(freq - truth).sum() < 0.01

    def test_state_untouched(self, rng):
        s = ghz_state(3)
        before = s.x.copy(), s.z.copy(), s.r.copy()
        measure_all(s, rng)
        assert all(np.array_equal(a, b) for a, b in zip(before, (s.x, s.z, s.r)))


gate_ops = st.lists(
    st.tuples(st.sampled_from(["h", "s", "cx", "pauli", "clifford"]), st.integers(0, 2**31 - 1)),
    max_size=12,
)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(1, 6), ops=gate_ops)
    def test_symplectic_rank_preserved(self, n, ops):
        s = ghz_state(n)
        for kind, seed in ops:
            r = np.random.default_rng(seed)
            if kind == "clifford":
                s = apply_clifford(s, random_clifford(n, r))
            elif kind == "pauli":
                s = apply_pauli(s, PauliString(n, int(r.integers(1 << n)), int(r.integers(1 << n))))
            elif kind == "cx" and n > 1:
                c, t = r.choice(n, 2, replace=False)
                s.cx(int(c), int(t))
            elif kind in ("h", "s"):
                getattr(s, kind)(int(r.integers(n)))
            measure_all(s, r)
        assert gf2_rank(s.symplectic_matrix()) == 2 * n
        assert s.is_valid()

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(1, 6), seed=st.integers(0, 2**31 - 1))
    def test_amplitudes_normalized_and_dyadic(self, n, seed):
        s = apply_clifford(ghz_state(n), random_clifford(n, np.random.default_rng(seed)))
        probs = probs_from_tableau(s)
        assert probs.sum() == 1.0
        nz = probs[probs > 0]
        assert np.all(np.log2(nz) == np.round(np.log2(nz)))
