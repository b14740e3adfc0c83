import numpy as np
import pytest

from rankmoa import (AffineMap, FrobeniusDistance, LinearTrace, ProblemSpec,
                     RankBound, check_second_order, orient_svd, plain_quad,
                     riemannian_quad, tangent_intersection_basis)
from rankmoa.cones import project_normal_fixed_rank, project_tangent_fixed_rank
from rankmoa.linalg import ThinSVD
from rankmoa.oracle import curvature_quadratic_terms, fd_quad

from conftest import random_rank_matrix


def test_riemannian_quad_reduces_to_hessian_when_gradient_vanishes(rng):
    X = random_rank_matrix(rng, 3, 3, 2)
    svd = orient_svd(X)
    prob = ProblemSpec(FrobeniusDistance(X), AffineMap([], [], shape=(3, 3)),
                       RankBound(2))
    for _ in range(5):
        xi = rng.standard_normal((3, 3))
        val = riemannian_quad(prob, svd, np.zeros(0), xi)
        assert abs(val - float(np.sum(xi * xi))) <= 1e-10
        assert abs(val - plain_quad(prob, X, xi)) <= 1e-10


def test_riemannian_quad_positive_at_hankel_target(hankel_case):
    spec, points = hankel_case
    svd = orient_svd(points["Xbar"])
    rng = np.random.default_rng(7)
    for _ in range(20):
        xi = project_tangent_fixed_rank(svd, rng.standard_normal((3, 3)))
        if np.linalg.norm(xi) < 1e-12:
            continue
        assert riemannian_quad(spec, svd, np.zeros(4), xi) > 0.0


def test_riemannian_quad_wrong_case(trace_case):
    spec, points = trace_case
    svd = orient_svd(points["X1"])  # rank 2 < bound 3
    with pytest.raises(ValueError):
        riemannian_quad(spec, svd, [-1.0], np.eye(4))


def test_curvature_term_cross_check(rng):
    # two independent assemblies of the correction term must agree, and the
    # implemented form must match them
    for _ in range(20):
        m, n = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        r = int(rng.integers(1, min(m, n) + 1))
        X = random_rank_matrix(rng, m, n, r)
        svd = orient_svd(X)
        G = rng.standard_normal((m, n))
        xi = project_tangent_fixed_rank(svd, rng.standard_normal((m, n)))
        via_factors, via_pinv = curvature_quadratic_terms(X, G, xi)
        assert abs(via_factors - via_pinv) <= 1e-10 * max(1.0, abs(via_pinv))
        if r >= min(m, n):
            continue
        amap = AffineMap([], [], shape=(m, n))
        prob = ProblemSpec(FrobeniusDistance(X - project_normal_fixed_rank(svd, G)),
                           amap, RankBound(r))
        # grad L = normal part of G at y = (), so the +2 convention matches
        # twice the factored assembly of the correction
        got = riemannian_quad(prob, svd, np.zeros(0), xi, curvature_coeff=2.0)
        want = float(np.sum(xi * xi)) + 2.0 * via_factors
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_plain_quad_kinds(rng, lrr_case):
    xi = rng.standard_normal((3, 3))
    fr = ProblemSpec(FrobeniusDistance(np.zeros((3, 3))),
                     AffineMap([], [], shape=(3, 3)), RankBound(2))
    assert abs(plain_quad(fr, np.zeros((3, 3)), xi) - np.sum(xi * xi)) <= 1e-12
    lin = ProblemSpec(LinearTrace(np.eye(3)), AffineMap([], [], shape=(3, 3)),
                      RankBound(2))
    assert plain_quad(lin, np.zeros((3, 3)), xi) == 0.0
    spec = lrr_case(3)
    assert abs(plain_quad(spec, np.zeros((3, 3)), xi) - np.sum(xi * xi)) <= 1e-12
    # agree with the one-dimensional finite difference
    assert abs(plain_quad(spec, np.zeros((3, 3)), xi)
               - fd_quad(spec.objective, np.zeros((3, 3)), xi)) <= 1e-5


def test_tangent_intersection_basis_dimensions(rng, hankel_case):
    X = random_rank_matrix(rng, 3, 3, 2)
    svd = orient_svd(X)
    amap = AffineMap([], [], shape=(3, 3))
    basis = tangent_intersection_basis(svd, amap, 2)
    assert len(basis) == 8  # mn - (m-r)(n-r)

    spec, points = hankel_case
    svd = orient_svd(points["Xbar"])
    basis = tangent_intersection_basis(svd, spec.affine, 2)
    assert len(basis) == 4  # 5-dim Hankel kernel meets the 8-dim tangent space
    for xi in basis:
        assert np.linalg.norm(spec.affine.apply(xi)) <= 1e-8
        normal_part = project_normal_fixed_rank(svd, xi)
        assert np.linalg.norm(normal_part) <= 1e-10
    gram = np.array([[float(np.tensordot(a, b)) for b in basis] for a in basis])
    assert np.allclose(gram, np.eye(len(basis)), atol=1e-10)

    # constraints spanning the whole space leave nothing
    full = [m.reshape(3, 3) for m in np.eye(9)]
    amap_full = AffineMap(full, np.zeros(9))
    assert tangent_intersection_basis(svd, amap_full, 2) == []


def test_tangent_intersection_basis_wrong_case(trace_case):
    spec, points = trace_case
    svd = orient_svd(points["X1"])
    with pytest.raises(ValueError):
        tangent_intersection_basis(svd, spec.affine, 3)


def test_joint_nullspace_oracle_for_hankel_basis(hankel_case):
    # brute-force the joint nullspace dimension from stacked linear conditions
    spec, points = hankel_case
    svd = orient_svd(points["Xbar"])
    rows = [a.ravel() for a in spec.affine.mats]
    up, vp = svd.u_perp, svd.v_perp
    for i in range(up.shape[1]):
        for j in range(vp.shape[1]):
            rows.append(np.outer(up[:, i], vp[:, j]).ravel())
    import scipy.linalg
    dim = scipy.linalg.null_space(np.stack(rows)).shape[1]
    assert dim == len(tangent_intersection_basis(svd, spec.affine, 2))


def test_check_second_order_hankel_both_signs(hankel_case):
    spec, points = hankel_case
    for coeff in (-2.0, 2.0):
        rep = check_second_order(spec, points["Xbar"], np.zeros(4),
                                 curvature_coeff=coeff)
        assert rep.case == "full_rank"
        assert rep.basis_dim == 4
        assert rep.min_eig > 0
        assert rep.sufficient_ok and rep.necessary_ok


def test_check_second_order_lrr_tier1(lrr_case):
    spec = lrr_case(3)
    wbar = np.full((3, 3), 1.0 / 3.0)
    rep = check_second_order(spec, wbar, -np.ones(3) / 3.0, samples=500, seed=3)
    assert rep.case == "rank_deficient"
    assert rep.sufficient_ok and rep.necessary_ok
    assert rep.basis_dim == 6  # dim ker A = N^2 - N
    assert abs(rep.min_eig - 1.0) <= 1e-9  # identity Hessian on ker A
    assert rep.cone_violations == 0


def test_check_second_order_linear_objective_flat(rng):
    # vanishing-gradient linear objective: the reduced form is identically
    # zero, so the necessary condition holds but sufficiency never certifies
    X = random_rank_matrix(rng, 3, 3, 2)
    prob = ProblemSpec(LinearTrace(np.zeros((3, 3))),
                       AffineMap([], [], shape=(3, 3)), RankBound(2))
    rep = check_second_order(prob, X, np.zeros(0))
    assert rep.case == "full_rank"
    assert abs(rep.min_eig) <= 1e-9 and abs(rep.max_eig) <= 1e-9
    assert rep.necessary_ok and not rep.sufficient_ok

    # rank-deficient variant: plain hessian of a linear objective is zero
    Xlow = random_rank_matrix(rng, 3, 3, 1)
    mats = [np.eye(3)]
    amap = AffineMap(mats, [float(np.trace(Xlow))])
    prob2 = ProblemSpec(LinearTrace(np.eye(3) / np.sqrt(3.0)), amap, RankBound(2))
    y = [-1.0 / np.sqrt(3.0)]  # makes grad L vanish
    rep2 = check_second_order(prob2, Xlow, y, samples=100)
    assert rep2.case == "rank_deficient"
    assert abs(rep2.min_eig) <= 1e-12 and abs(rep2.max_eig) <= 1e-12
    assert rep2.necessary_ok and not rep2.sufficient_ok


def test_check_second_order_requires_stationarity(trace_case):
    spec, points = trace_case
    with pytest.raises(ValueError):
        check_second_order(spec, points["X1"], [0.0])  # not F-stationary there


def test_negative_curvature_detected_by_sampling(rng):
    # concave objective at a rank-deficient stationary point: the ker-A
    # certificate fails and sampled cone directions expose the violation
    n = 3
    X = np.zeros((n, n))

    from rankmoa.model import CustomObjective
    obj = CustomObjective(
        "concave-quadratic", (n, n),
        value_fn=lambda Y: -0.5 * float(np.sum(Y * Y)),
        grad_fn=lambda Y: -Y,
        hess_apply_fn=lambda Y, Xi: -Xi,
    )
    prob = ProblemSpec(obj, AffineMap([], [], shape=(n, n)), RankBound(2))
    rep = check_second_order(prob, X, np.zeros(0), samples=200, seed=1)
    assert rep.case == "rank_deficient"
    assert not rep.sufficient_ok
    assert not rep.necessary_ok
    assert rep.cone_violations > 0
    assert rep.cone_samples_tested > 0


def test_sufficient_certificate_forbids_violations(rng):
    for trial in range(10):
        m = n = 4
        r = 2
        s = int(rng.integers(0, r))
        X = random_rank_matrix(rng, m, n, s)
        mats = [rng.standard_normal((m, n)) for _ in range(2)]
        amap = AffineMap(mats, [float(np.tensordot(a, X)) for a in mats])
        prob = ProblemSpec(FrobeniusDistance(X), amap, RankBound(r))
        rep = check_second_order(prob, X, np.zeros(2), samples=300, seed=trial)
        assert rep.sufficient_ok
        assert rep.cone_violations == 0


def test_riemannian_quad_invariant_under_reorientation(rng, hankel_case):
    spec, points = hankel_case
    svd = orient_svd(points["Xbar"])
    xi = rng.standard_normal((3, 3))
    base = riemannian_quad(spec, svd, np.zeros(4), xi)
    signs = rng.choice([-1.0, 1.0], size=3)
    u = svd.u * signs
    v = svd.v * signs
    flipped = ThinSVD(u=u, v=v, sigma=svd.sigma, gamma=svd.gamma,
                      rank_tol=svd.rank_tol)
    assert abs(riemannian_quad(spec, flipped, np.zeros(4), xi) - base) <= 1e-9


def test_form_matrix_symmetry(hankel_case):
    from rankmoa.second_order import _form_matrix, _tangent_directions
    spec, points = hankel_case
    svd = orient_svd(points["Xbar"])
    from rankmoa.linalg import pseudo_inverse
    pinv = pseudo_inverse(svd)
    gradL = np.zeros((3, 3))
    gradL[2, 2] = -1e-6
    X = points["Xbar"]

    def bil(P, R):
        hess = float(np.tensordot(spec.objective.hess_apply(X, P), R))
        curv = 0.5 * float(np.tensordot(gradL, P @ pinv @ R + R @ pinv @ P))
        return hess - 2.0 * curv

    basis = _tangent_directions(svd)
    Q = _form_matrix(basis, bil)
    assert np.linalg.norm(Q - Q.T) <= 1e-12
