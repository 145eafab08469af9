import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def rand_matrix(rng, p, q, scale=1.0):
    return scale * (rng.normal(size=(p, q)) + 1j * rng.normal(size=(p, q)))


def rand_rank_deficient(rng, q, r):
    """q x q matrix of exact rank r."""
    A = rand_matrix(rng, q, r)
    B = rand_matrix(rng, r, q)
    return A @ B


def rand_psd(rng, q, rank=None):
    X = rand_matrix(rng, q, q)
    Q, _ = np.linalg.qr(X)
    w = rng.uniform(0.3, 1.5, size=q)
    if rank is not None and rank < q:
        w[: q - rank] = 0.0
    return (Q * w) @ Q.conj().T


def rand_hermitian(rng, q):
    A = rand_matrix(rng, q, q)
    return (A + A.conj().T) / 2
