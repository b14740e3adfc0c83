"""Independent brute-force verifiers.

Everything here deliberately avoids the code paths it is meant to check:
finite differences touch only objective values, the projection cross-check
re-derives the truncation from an eigendecomposition, and the curvature
cross-check assembles the correction term from the factored form with its
own projectors. Oracle tolerances are documented per function and are looser
than the core tolerances.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from .affine import AffineMap
from .linalg import as_matrix, orient_svd
from .qualification import assumption1_holds, assumption2_holds

FD_STEP = 1e-4


def fd_gradient(obj, X, h: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient, O(h^2); touches only obj.value."""
    X = as_matrix(X, "X")
    if h <= 0:
        raise ValueError("step h must be positive")
    g = np.zeros_like(X)
    for i in range(X.shape[0]):
        for j in range(X.shape[1]):
            e = np.zeros_like(X)
            e[i, j] = h
            g[i, j] = (obj.value(X + e) - obj.value(X - e)) / (2.0 * h)
    return g


def fd_quad(obj, X, Xi, h: float = FD_STEP) -> float:
    """Central second difference of t -> f(X + t*Xi), O(h^2)."""
    X = as_matrix(X, "X")
    Xi = as_matrix(Xi, "Xi")
    if h <= 0:
        raise ValueError("step h must be positive")
    return (obj.value(X + h * Xi) - 2.0 * obj.value(X) + obj.value(X - h * Xi)) / h**2


def projection_cross_check(Z, r: int, rank_tol: float = 1e-8) -> float:
    """Discrepancy between two independent best rank-r approximations.

    Route one truncates the SVD; route two projects the columns of Z onto
    the top-r eigenspace of Z^T Z. Away from a tie at sigma_r the result is
    the Frobenius distance between the two projections (expected <= 1e-8);
    at a tie the projections may legitimately differ, so the comparison
    falls back to the difference of the two approximation errors.
    """
    Z = as_matrix(Z, "Z")
    k = min(Z.shape)
    if not 0 <= r <= k:
        raise ValueError(f"rank {r} out of range for shape {Z.shape}")
    u, s, vh = np.linalg.svd(Z)
    p_svd = (u[:, :r] * s[:r]) @ vh[:r, :]
    w, V = np.linalg.eigh(Z.T @ Z)  # ascending eigenvalues
    Vr = V[:, ::-1][:, :r]
    p_eig = Z @ Vr @ Vr.T
    tie = bool(0 < r < k and s[r - 1] <= s[r] + rank_tol * (s[0] if s.size else 0.0))
    if tie:
        return abs(float(np.linalg.norm(Z - p_svd)) - float(np.linalg.norm(Z - p_eig)))
    return float(np.linalg.norm(p_svd - p_eig))


def _line_value(H, M):
    """min_t 0.5 * ||H - t*M||_F^2 and its minimizer."""
    denom = float(np.sum(M * M))
    t = float(np.sum(H * M)) / denom
    return 0.5 * float(np.sum((H - t * M) ** 2)), t * M


def rank1_hankel_min(H, grid: int = 10001, refine_iters: int = 60,
                     family: str = "full"):
    """Global search of 0.5 ||H - X||^2 over rank-1 Hankel 3 x 3 matrices.

    family="lines" restricts to the three coordinate lines t*e1e1^T, t*ee^T,
    t*e3e3^T. family="full" adds the geometric family c * u u^T with
    u = (1, q, q^2), which covers every rank-1 Hankel matrix except the
    t*e3e3^T line (the q -> inf limit); the search grids q over [-10, 10]
    and refines the best bracket. Returns (value, minimizer).
    """
    H = as_matrix(H, "H")
    if H.shape != (3, 3):
        raise ValueError("rank-1 Hankel search is implemented for 3 x 3 targets")
    e1 = np.zeros((3, 3))
    e1[0, 0] = 1.0
    e3 = np.zeros((3, 3))
    e3[2, 2] = 1.0
    ones = np.ones((3, 3))
    candidates = [_line_value(H, M) for M in (e1, ones, e3)]
    if family not in ("full", "lines"):
        raise ValueError(f"unknown family {family!r}")
    if family == "full":
        def value_at(q):
            u = np.array([1.0, q, q * q])
            uhu = float(u @ H @ u)
            norm4 = float(u @ u) ** 2
            return 0.5 * (float(np.sum(H * H)) - uhu * uhu / norm4)

        qs = np.linspace(-10.0, 10.0, int(grid))
        vals = np.array([value_at(q) for q in qs])
        i = int(np.argmin(vals))
        lo = qs[max(i - 1, 0)]
        hi = qs[min(i + 1, len(qs) - 1)]
        res = minimize_scalar(value_at, bounds=(lo, hi), method="bounded",
                              options={"maxiter": int(refine_iters), "xatol": 1e-14})
        q = float(res.x) if res.fun < vals[i] else float(qs[i])
        u = np.array([1.0, q, q * q])
        M = np.outer(u, u)
        candidates.append(_line_value(H, M))
    value, X = min(candidates, key=lambda c: c[0])
    return value, X


def diag_embedding_equivalence(a_vecs, x, r: int, rank_tol: float = 1e-8) -> bool:
    """Sparse-vector instance vs its diagonal-matrix embedding.

    The vector-side qualification asks the constraint vectors restricted to
    the support of x to be linearly independent. Embedding x as Diag(x) with
    constraints Diag(a_i), both compressed-matrix qualifications must give
    the same verdict; returns True when all three agree.
    """
    a_vecs = [np.atleast_1d(np.asarray(a, dtype=float)) for a in a_vecs]
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    for a in a_vecs:
        if a.shape != (n,):
            raise ValueError("constraint vectors must match the length of x")
    supp = np.flatnonzero(np.abs(x) > rank_tol * max(1.0, float(np.abs(x).max(initial=0.0))))
    if len(supp) > r:
        raise ValueError(f"x has support {len(supp)} above the sparsity bound {r}")
    l = len(a_vecs)
    if l == 0:
        vec_ok = True
    elif supp.size == 0:
        vec_ok = False
    else:
        rows = np.stack([a[supp] for a in a_vecs])
        sv = np.linalg.svd(rows, compute_uv=False)
        vec_ok = sv.size > 0 and sv[0] > 0 and \
            int(np.count_nonzero(sv > rank_tol * sv[0])) == l

    amap = AffineMap([np.diag(a) for a in a_vecs], np.zeros(l), shape=(n, n))
    svd = orient_svd(np.diag(x), rank_tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        a1, _ = assumption1_holds(svd, amap, rank_tol)
        a2, _ = assumption2_holds(svd, amap, rank_tol)
    return bool(a1 == a2 == vec_ok)


SUITES = ("fd", "projection", "hankel-rank1", "diag-embed")


def run_suite(name: str, seed: int = 0):
    """Run a named verification suite; returns (ok, list of report lines)."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    rng = np.random.default_rng(seed)
    lines = []
    ok = True

    def check(label, good):
        nonlocal ok
        lines.append(f"{'ok  ' if good else 'FAIL'} {label}")
        ok = ok and good

    if name == "fd":
        from .model import FrobeniusDistance, LinearTrace, RowQuadratic
        for trial in range(30):
            m, n = rng.integers(2, 5, size=2)
            pick = trial % 3
            if pick == 0:
                obj = FrobeniusDistance(rng.standard_normal((m, n)))
            elif pick == 1:
                obj = LinearTrace(rng.standard_normal((m, n)))
            else:
                obj = RowQuadratic([rng.standard_normal((n, n)) for _ in range(n)])
            X = rng.standard_normal(obj.shape)
            Xi = rng.standard_normal(obj.shape)
            g = obj.grad(X)
            gerr = np.linalg.norm(fd_gradient(obj, X) - g) / max(1.0, np.linalg.norm(g))
            q = obj.hess_quad(X, Xi)
            qerr = abs(fd_quad(obj, X, Xi) - q) / max(1.0, abs(q))
            check(f"{obj.kind} trial {trial}: grad {gerr:.2e}, quad {qerr:.2e}",
                  gerr <= 1e-5 and qerr <= 1e-5)
    elif name == "projection":
        from .linalg import project_low_rank
        for trial in range(30):
            m, n = rng.integers(2, 7, size=2)
            Z = rng.standard_normal((m, n))
            r = int(rng.integers(0, min(m, n) + 1))
            d = projection_cross_check(Z, r)
            P, tie = project_low_rank(Z, r)
            u, s, vh = np.linalg.svd(Z)
            resid = abs(np.linalg.norm(Z - P) - np.sqrt(np.sum(s[r:] ** 2)))
            check(f"shape {m}x{n} r={r}: routes {d:.2e}, error match {resid:.2e}"
                  f"{' (tie)' if tie else ''}", d <= 1e-8 and resid <= 1e-8)
    elif name == "hankel-rank1":
        H = np.array([[112.0, 7.5, 0.0], [7.5, 0.0, 0.0], [0.0, 0.0, 1e-6]])
        xbar = H.copy()
        xbar[2, 2] = 0.0
        f_xbar = 0.5 * float(np.sum((H - xbar) ** 2))
        v_lines, x_lines = rank1_hankel_min(H, family="lines")
        v_full, _ = rank1_hankel_min(H, family="full")
        check(f"coordinate-line minimum {v_lines:.6f} at t*e1e1^T",
              abs(v_lines - 56.25) <= 1e-6 and abs(x_lines[0, 0] - 112.0) <= 1e-6)
        check(f"full-family minimum {v_full:.6f} <= line minimum", v_full <= v_lines + 1e-12)
        check(f"f(Xbar) = {f_xbar:.3e} beats every rank-1 Hankel matrix",
              f_xbar < v_full)
    elif name == "diag-embed":
        for trial in range(30):
            n = int(rng.integers(2, 7))
            r = int(rng.integers(1, n))
            s = int(rng.integers(0, r + 1))
            l = int(rng.integers(0, n + 1))
            x = np.zeros(n)
            supp = rng.choice(n, size=s, replace=False)
            x[supp] = rng.standard_normal(s) + np.sign(rng.standard_normal(s)) * 0.5
            a_vecs = [rng.standard_normal(n) for _ in range(l)]
            good = diag_embedding_equivalence(a_vecs, x, r)
            check(f"n={n} r={r} s={s} l={l}", good)
    return ok, lines


def curvature_quadratic_terms(X, G, Xi, rank_tol: float = 1e-8):
    """The curvature correction <G_N, Xi X^+ Xi> assembled two ways.

    Returns (via_factors, via_pinv): the first contracts the factored form
    built from P = Pu_perp Xi Vg and Q = Pv_perp Xi^T Ug against Xi, the
    second uses the Moore-Penrose inverse directly. Both are computed here
    from a fresh SVD with local projectors. Agreement is expected to 1e-10
    relative for tangent directions.
    """
    X = as_matrix(X, "X")
    G = as_matrix(G, "G")
    Xi = as_matrix(Xi, "Xi")
    u, s, vh = np.linalg.svd(X)
    cutoff = rank_tol * (s[0] if s.size else 0.0)
    k = int(np.count_nonzero(s > cutoff))
    ug, vg = u[:, :k], vh.T[:, :k]
    pu_perp = np.eye(X.shape[0]) - ug @ ug.T
    pv_perp = np.eye(X.shape[1]) - vg @ vg.T
    sig_inv = np.diag(1.0 / s[:k]) if k else np.zeros((0, 0))

    q_fac = pv_perp @ Xi.T @ ug
    p_fac = pu_perp @ Xi @ vg
    h_term = pu_perp @ G @ q_fac @ sig_inv @ vg.T + ug @ sig_inv @ p_fac.T @ G @ pv_perp
    via_factors = 0.5 * float(np.tensordot(h_term, Xi))

    pinv = vg @ sig_inv @ ug.T
    g_normal = pu_perp @ G @ pv_perp
    via_pinv = float(np.tensordot(g_normal, Xi @ pinv @ Xi))
    return via_factors, via_pinv
