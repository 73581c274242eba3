from __future__ import annotations

import numpy as np
import pytest

from causalprobe.core import StateVector


def random_state(dims, rng) -> StateVector:
    total = int(np.prod(dims))
    amp = rng.normal(size=total) + 1j * rng.normal(size=total)
    return StateVector(dims, amp / np.linalg.norm(amp))


def random_unitary(n: int, rng) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20231202)
