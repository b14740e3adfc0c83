import numpy as np
import pytest

from rankmoa import (build_diagonal_example, build_hankel_example, build_lrr,
                     build_trace_example)


@pytest.fixture(scope="session")
def hankel_case():
    spec, points = build_hankel_example()
    return spec, points


@pytest.fixture(scope="session")
def trace_case():
    spec, points = build_trace_example()
    return spec, points


@pytest.fixture(scope="session")
def diagonal_case():
    spec, points = build_diagonal_example()
    return spec, points


@pytest.fixture(scope="session")
def lrr_case():
    def make(n, r=2):
        return build_lrr([np.eye(n) for _ in range(n)], r)
    return make


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def random_rank_matrix(rng, m, n, rank, scale=1.0):
    """Random m x n matrix of exact rank with singular values in [1, 2]*scale."""
    if rank == 0:
        return np.zeros((m, n))
    u, _ = np.linalg.qr(rng.standard_normal((m, rank)))
    v, _ = np.linalg.qr(rng.standard_normal((n, rank)))
    s = scale * (1.0 + rng.random(rank))
    return (u * s) @ v.T
