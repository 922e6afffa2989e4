"""Dense GF(2) helpers for small binary matrices."""

from __future__ import annotations

import numpy as np


def gf2_rank(mat: np.ndarray) -> int:
    """Rank over GF(2) by Gaussian elimination on a copy."""
    m = (np.asarray(mat) % 2).astype(np.uint8)
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        pivots = np.nonzero(m[rank:, c])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        if p != rank:
            m[[rank, p]] = m[[p, rank]]
        below = np.nonzero(m[:, c])[0]
        below = below[below != rank]
        m[below] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank
