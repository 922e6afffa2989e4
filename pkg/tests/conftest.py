from __future__ import annotations

import os

import numpy as np
import pytest

FULL_SCALE = os.environ.get("SHADOWQAE_FULL", "") == "1"


def pytest_collection_modifyitems(config, items):
    if FULL_SCALE:
        return
    skip = pytest.mark.skip(reason="full-scale run; set SHADOWQAE_FULL=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


# dense gate helpers, written independently of the tableau code
H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S1 = np.diag([1, 1j])


def dense_1q(vec: np.ndarray, gate: np.ndarray, q: int, n: int) -> np.ndarray:
    # qubit q is bit q of the basis index; reshape puts bit q on axis n-1-q
    t = vec.reshape([2] * n)
    axis = n - 1 - q
    t = np.moveaxis(np.tensordot(gate, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def dense_cx(vec: np.ndarray, c: int, t: int, n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    src = np.where((idx >> c) & 1, idx ^ (1 << t), idx)
    return vec[src]
