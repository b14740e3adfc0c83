import numpy as np
import pytest
import scipy.linalg

from rankmoa import (RankBound, orient_svd, project_low_rank, pseudo_inverse,
                     rank_estimate, spectral_norm, thin_svd)

from conftest import random_rank_matrix


def _check_factorization(X, f):
    m, n = X.shape
    assert np.linalg.norm(f.u @ f.u.T - np.eye(m)) <= 1e-10
    assert np.linalg.norm(f.v @ f.v.T - np.eye(n)) <= 1e-10
    scale = max(1.0, np.linalg.norm(X))
    assert np.linalg.norm(f.reconstruct() - X) <= 1e-10 * scale
    assert np.all(np.diff(f.sigma) <= 1e-12)
    # gamma is the prefix of singular values above the relative cutoff
    assert np.array_equal(f.gamma, np.arange(f.rank))
    assert np.all(f.sigma[: f.rank] > f.threshold)
    assert np.all(f.sigma[f.rank :] <= f.threshold)


def test_thin_svd_rank_one_outer_product():
    X = np.zeros((3, 3))
    X[0, 1] = 1.0  # e1 e2^T
    f = thin_svd(X)
    _check_factorization(X, f)
    assert np.allclose(f.sigma, [1.0, 0.0, 0.0])
    assert f.rank == 1


def test_thin_svd_zero_matrix():
    f = thin_svd(np.zeros((4, 3)))
    assert f.rank == 0
    assert f.gamma.size == 0
    _check_factorization(np.zeros((4, 3)), f)


def test_thin_svd_hankel_target(hankel_case):
    _, points = hankel_case
    f = thin_svd(points["Xbar"])
    assert np.allclose(f.sigma, [112.5, 0.5, 0.0], atol=1e-9)
    assert f.rank == 2


def test_thin_svd_random_shapes(rng):
    for m, n in [(5, 3), (3, 5), (4, 4), (6, 2)]:
        X = rng.standard_normal((m, n))
        _check_factorization(X, thin_svd(X))


def test_thin_svd_rejects_bad_input():
    with pytest.raises(ValueError):
        thin_svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        thin_svd(np.ones(3))
    with pytest.raises(ValueError):
        thin_svd(np.eye(2), rank_tol=0.0)


def test_orient_sign_pushed_to_v():
    X = np.zeros((3, 3))
    X[0, 0] = -1.0  # -e1 e1^T
    f = orient_svd(X)
    assert np.allclose(f.u[:, 0], [1, 0, 0])
    assert np.allclose(f.v[:, 0], [-1, 0, 0])
    _check_factorization(X, f)


def test_orient_diagonal_is_identity():
    f = orient_svd(np.diag([2.0, 1.0]))
    assert np.allclose(f.u, np.eye(2))
    assert np.allclose(f.v, np.eye(2))


def test_orient_hankel_matches_hand_basis(hankel_case):
    # cross-checked against an independent routine and the closed form:
    # u1 = (a, b, 0), u2 = (-b, a, 0) with a = sqrt(112.5/113), b = sqrt(0.5/113)
    _, points = hankel_case
    f = orient_svd(points["Xbar"])
    a = np.sqrt(112.5 / 113.0)
    b = np.sqrt(0.5 / 113.0)
    assert np.allclose(f.u[:, 0], [a, b, 0], atol=1e-12)
    assert np.allclose(f.u[:, 1], [-b, a, 0], atol=1e-12)
    assert np.allclose(np.abs(f.u[:, 2]), [0, 0, 1], atol=1e-12)
    u2, s2, vh2 = scipy.linalg.svd(points["Xbar"])
    assert np.allclose(f.sigma, s2, atol=1e-9)
    for k in range(3):
        assert min(np.linalg.norm(f.u[:, k] - u2[:, k]),
                   np.linalg.norm(f.u[:, k] + u2[:, k])) <= 1e-9


def test_orient_convention_on_every_column(rng):
    for _ in range(20):
        m, n = rng.integers(2, 6, size=2)
        f = orient_svd(rng.standard_normal((m, n)))
        for j in range(m):
            i = int(np.argmax(np.abs(f.u[:, j])))
            assert f.u[i, j] >= 0
        _check_factorization(f.reconstruct(), f)


def test_pseudo_inverse_diagonal():
    f = thin_svd(np.diag([2.0, 4.0]))
    assert np.allclose(pseudo_inverse(f), np.diag([0.5, 0.25]))


def test_pseudo_inverse_zero():
    assert np.allclose(pseudo_inverse(thin_svd(np.zeros((3, 2)))), np.zeros((2, 3)))


def test_pseudo_inverse_penrose_identities(hankel_case, rng):
    _, points = hankel_case
    mats = [points["Xbar"]] + [rng.standard_normal((4, 3)) for _ in range(5)]
    for X in mats:
        P = pseudo_inverse(thin_svd(X))
        assert np.linalg.norm(X @ P @ X - X) <= 1e-9 * max(1, np.linalg.norm(X))
        assert np.linalg.norm(P @ X @ P - P) <= 1e-9 * max(1, np.linalg.norm(P))
        assert np.allclose(pseudo_inverse(thin_svd(X)), np.linalg.pinv(X), atol=1e-9)


def test_project_low_rank_diagonal():
    P, tie = project_low_rank(np.diag([3.0, 2.0, 1.0]), 2)
    assert np.allclose(P, np.diag([3.0, 2.0, 0.0]))
    assert not tie


def test_project_low_rank_tie_on_identity():
    P, tie = project_low_rank(np.eye(3), 2)
    assert tie
    assert rank_estimate(P) == 2
    assert abs(np.linalg.norm(np.eye(3) - P) - 1.0) <= 1e-12


def test_project_low_rank_gradient_step_returns_fixed_point(trace_case):
    # X4 minus the full Lagrangian gradient at y = -2/3 projects back to X4
    _, points = trace_case
    X4 = points["X4"]
    Z = X4.copy()
    Z[2, 2] = -1.0 / 3.0
    P, tie = project_low_rank(Z, 3)
    assert not tie
    assert np.allclose(P, X4, atol=1e-12)


def test_project_low_rank_range_errors():
    with pytest.raises(ValueError):
        project_low_rank(np.eye(3), 4)
    with pytest.raises(ValueError):
        project_low_rank(np.eye(3), -1)


def test_project_low_rank_accepts_rank_bound_record():
    P, _ = project_low_rank(np.diag([3.0, 2.0, 1.0]), RankBound(1))
    assert rank_estimate(P) == 1


def test_rank_bound_validation():
    with pytest.raises(ValueError):
        RankBound(-1)
    with pytest.raises(ValueError):
        RankBound(3).check_shape(4, 3)
    RankBound(2).check_shape(4, 3)


def test_eckart_young_sampling(rng):
    for _ in range(40):
        m, n = rng.integers(2, 7, size=2)
        r = int(rng.integers(1, min(m, n)))
        Z = rng.standard_normal((m, n))
        P, _ = project_low_rank(Z, r)
        best = np.linalg.norm(Z - P)
        for _ in range(50):
            Y = random_rank_matrix(rng, m, n, r, scale=np.abs(Z).max())
            assert best <= np.linalg.norm(Z - Y) + 1e-9


def test_projection_idempotent(rng):
    for _ in range(20):
        m, n = rng.integers(2, 6, size=2)
        r = int(rng.integers(0, min(m, n) + 1))
        Z = rng.standard_normal((m, n))
        P, _ = project_low_rank(Z, r)
        P2, _ = project_low_rank(P, r)
        assert np.linalg.norm(P2 - P) <= 1e-10 * max(1.0, np.linalg.norm(P))
        assert rank_estimate(P) <= r


def test_spectral_norm_and_rank_estimate(hankel_case, trace_case):
    assert spectral_norm(np.zeros((3, 3))) == 0.0
    assert rank_estimate(np.zeros((3, 3))) == 0
    # Lagrangian gradient of the trace instance at (X4, y=-2/3) is e3 e3^T / 3
    _, points = trace_case
    G = np.zeros((4, 4))
    G[2, 2] = 1.0 / 3.0
    assert abs(spectral_norm(G) - 1.0 / 3.0) <= 1e-15
    _, hpoints = hankel_case
    assert abs(spectral_norm(hpoints["Xbar"]) - 112.5) <= 1e-9
    assert rank_estimate(hpoints["Xbar"]) == 2
