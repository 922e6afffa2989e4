"""Numba kernels for tableau arithmetic.

Tableau layout: ``x`` and ``z`` are ``(2n, n)`` uint8 arrays, ``r`` is a
``(2n,)`` uint8 sign vector. Rows ``0..n-1`` are destabilizers, rows
``n..2n-1`` stabilizers. Row ``k`` encodes ``(-1)^r[k]`` times the Hermitian
Pauli with a ``Y`` wherever both bits are set.

Clifford tables use the same bit layout: row ``j`` is the image of ``X_j``,
row ``n + j`` the image of ``Z_j``, columns ``[x bits | z bits]``.

All randomness is drawn by the caller and passed in, so every kernel is a
pure function of its arguments.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _g(x1, z1, x2, z2):
    # exponent of i picked up by P1 * P2 on one qubit
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@njit(cache=True)
def rowsum(x, z, r, h, i):
    """Replace row ``h`` by the product ``row_i * row_h``."""
    n = x.shape[1]
    e = 2 * np.int64(r[h]) + 2 * np.int64(r[i])
    for j in range(n):
        e += _g(np.int64(x[i, j]), np.int64(z[i, j]), np.int64(x[h, j]), np.int64(z[h, j]))
        x[h, j] ^= x[i, j]
        z[h, j] ^= z[i, j]
    e = ((e % 4) + 4) % 4
    r[h] = 0 if e == 0 else 1


@njit(cache=True)
def measure_qubit(x, z, r, a, coin):
    """Z-measure qubit ``a`` in place.

    ``coin`` is the outcome used if the result is random. Returns
    ``(outcome, was_random)``.
    """
    n = x.shape[1]
    p = -1
    for i in range(n, 2 * n):
        if x[i, a]:
            p = i
            break
    if p >= 0:
        for i in range(2 * n):
            if i != p and x[i, a]:
                rowsum(x, z, r, i, p)
        for j in range(n):
            x[p - n, j] = x[p, j]
            z[p - n, j] = z[p, j]
            x[p, j] = 0
            z[p, j] = 0
        r[p - n] = r[p]
        z[p, a] = 1
        r[p] = coin
        return coin, True
    # deterministic: accumulate the stabilizer product into a scratch row
    sx = np.zeros((1, n), dtype=np.uint8)
    sz = np.zeros((1, n), dtype=np.uint8)
    sr = np.zeros(1, dtype=np.uint8)
    for i in range(n):
        if x[i, a]:
            e = 2 * np.int64(sr[0]) + 2 * np.int64(r[i + n])
            for j in range(n):
                e += _g(np.int64(x[i + n, j]), np.int64(z[i + n, j]),
                        np.int64(sx[0, j]), np.int64(sz[0, j]))
                sx[0, j] ^= x[i + n, j]
                sz[0, j] ^= z[i + n, j]
            e = ((e % 4) + 4) % 4
            sr[0] = 0 if e == 0 else 1
    return sr[0], False


@njit(cache=True)
def measure_all(x, z, r, coins):
    """Measure every qubit in order; returns the outcome as an integer (qubit j -> 2^j)."""
    n = x.shape[1]
    out = 0
    for a in range(n):
        bit, _ = measure_qubit(x, z, r, a, coins[a])
        if bit:
            out |= 1 << a
    return out


@njit(cache=True)
def postselect(x, z, r, b):
    """Log2 of ``1 / |<b|state>|^2``, or -1 if the overlap vanishes.

    Conditions qubits one at a time on the bits of ``b``; consumes the
    tableau.
    """
    n = x.shape[1]
    k = 0
    for a in range(n):
        want = (b >> a) & 1
        bit, was_random = measure_qubit(x, z, r, a, np.uint8(want))
        if was_random:
            k += 1
        elif bit != want:
            return -1
    return k


@njit(cache=True)
def conjugate_rows(x, z, r, table, phase):
    """Map every row ``P`` to ``C P C^dag``; returns new arrays."""
    rows, n = x.shape
    ox = np.zeros((rows, n), dtype=np.uint8)
    oz = np.zeros((rows, n), dtype=np.uint8)
    orr = np.zeros(rows, dtype=np.uint8)
    for k in range(rows):
        e = 2 * np.int64(r[k])
        for j in range(n):
            xj = x[k, j]
            zj = z[k, j]
            if xj:
                e += 2 * np.int64(phase[j])
                for q in range(n):
                    e += _g(np.int64(ox[k, q]), np.int64(oz[k, q]),
                            np.int64(table[j, q]), np.int64(table[j, n + q]))
                    ox[k, q] ^= table[j, q]
                    oz[k, q] ^= table[j, n + q]
            if zj:
                g = n + j
                e += 2 * np.int64(phase[g])
                for q in range(n):
                    e += _g(np.int64(ox[k, q]), np.int64(oz[k, q]),
                            np.int64(table[g, q]), np.int64(table[g, n + q]))
                    ox[k, q] ^= table[g, q]
                    oz[k, q] ^= table[g, n + q]
            if xj and zj:
                e += 1
        e = ((e % 4) + 4) % 4
        orr[k] = e // 2
    return ox, oz, orr


@njit(cache=True)
def _unit_lower_inverse(L):
    n = L.shape[0]
    X = np.zeros((n, n), dtype=np.uint8)
    for c in range(n):
        for i in range(n):
            v = np.uint8(1) if i == c else np.uint8(0)
            for k in range(i):
                v ^= L[i, k] & X[k, c]
            X[i, c] = v
    return X


@njit(cache=True)
def _matmul2(A, B):
    n, m = A.shape
    p = B.shape[1]
    out = np.zeros((n, p), dtype=np.uint8)
    for i in range(n):
        for k in range(m):
            if A[i, k]:
                for j in range(p):
                    out[i, j] ^= B[k, j]
    return out


@njit(cache=True)
def _hadamard_free_layer(n, gb, db):
    gamma = np.zeros((n, n), dtype=np.uint8)
    delta = np.eye(n, dtype=np.uint8)
    for i in range(n):
        gamma[i, i] = gb[i, i]
        for j in range(i):
            gamma[i, j] = gb[i, j]
            gamma[j, i] = gb[i, j]
            delta[i, j] = db[i, j]
    t = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    t[:n, :n] = delta
    t[n:, :n] = _matmul2(gamma, delta)
    t[n:, n:] = _unit_lower_inverse(delta).T
    return t


@njit(cache=True)
def build_clifford(n, u, bits):
    """Uniform Clifford symplectic table from pre-drawn randomness.

    Canonical-form sampler: a quantum-Mallows draw of the Hadamard layer and
    qubit permutation sandwiched between two Hadamard-free layers.
    ``u`` holds ``n`` uniforms in [0, 1); ``bits`` is a ``(4, n, n)`` array of
    random bits, of which each layer matrix uses its lower triangle and
    diagonal.
    """
    had = np.zeros(n, dtype=np.uint8)
    perm = np.zeros(n, dtype=np.int64)
    avail = np.arange(n)
    navail = n
    for i in range(n):
        m = n - i
        eps = 4.0 ** (-m)
        ri = u[i]
        index = -int(np.ceil(np.log2(ri + (1.0 - ri) * eps)))
        if index > 2 * m - 1:
            index = 2 * m - 1
        if index < m:
            had[i] = 1
            k = index
        else:
            k = 2 * m - index - 1
        perm[i] = avail[k]
        for t in range(k, navail - 1):
            avail[t] = avail[t + 1]
        navail -= 1

    t1 = _hadamard_free_layer(n, bits[0], bits[1])
    t2 = _hadamard_free_layer(n, bits[2], bits[3])
    permuted = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    for i in range(n):
        permuted[i] = t2[perm[i]]
        permuted[n + i] = t2[n + perm[i]]
    for i in range(n):
        if had[i]:
            tmp = permuted[i].copy()
            permuted[i] = permuted[n + i]
            permuted[n + i] = tmp
    return _matmul2(t1, permuted)


@njit(cache=True)
def pauli_flip_signs(x, z, r, px, pz):
    """Conjugate all rows by the Pauli with masks ``px``/``pz``: flips anticommuting signs."""
    rows, n = x.shape
    for k in range(rows):
        s = 0
        for j in range(n):
            s ^= (x[k, j] & pz[j]) ^ (z[k, j] & px[j])
        r[k] ^= s


@njit(cache=True, nogil=True)
def shadow_batch(x0, z0, r0, u, bits, phases, px, pz, coins):
    """Bob's CST loop over a batch of snapshots.

    For snapshot ``s``: corrupt the base state by Pauli ``(px[s], pz[s])``,
    rotate by the Clifford built from ``(u[s], bits[s], phases[s])`` and
    measure all qubits with ``coins[s]``. Returns the Clifford tables and the
    integer outcomes.
    """
    N = u.shape[0]
    n = x0.shape[1]
    tables = np.zeros((N, 2 * n, 2 * n), dtype=np.uint8)
    outcomes = np.zeros(N, dtype=np.int64)
    for s in range(N):
        tab = build_clifford(n, u[s], bits[s])
        tables[s] = tab
        x = x0.copy()
        z = z0.copy()
        r = r0.copy()
        pauli_flip_signs(x, z, r, px[s], pz[s])
        x, z, r = conjugate_rows(x, z, r, tab, phases[s])
        outcomes[s] = measure_all(x, z, r, coins[s])
    return tables, outcomes


@njit(cache=True, nogil=True)
def amplitude_batch(x0, z0, r0, tables, phases, outcomes):
    """``k`` with ``|<b_s|C_s|psi>|^2 = 2^-k`` for each record, or -1 for zero."""
    N = tables.shape[0]
    out = np.zeros(N, dtype=np.int64)
    for s in range(N):
        x, z, r = conjugate_rows(x0, z0, r0, tables[s], phases[s])
        out[s] = postselect(x, z, r, outcomes[s])
    return out
