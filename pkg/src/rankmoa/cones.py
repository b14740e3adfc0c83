"""Tangent/normal cone projections and membership tests for low-rank sets.

The fixed-rank manifold has explicit tangent and normal spaces built from the
ranked SVD factors. For the set of matrices with rank at most r these combine
into the Bouligand tangent cone, the Frechet normal cone (its polar) and the
larger Mordukhovich normal cone:

    T^B(X) = T_fixed(X) + {H in N_fixed(X) : rank(H) <= r - s}
    N^F(X) = N_fixed(X)            if s == r, else {O}
    N^M(X) = {W in N_fixed(X) : rank(W) <= min(m, n) - r}

where s is the numerical rank of the base point. Cones are never
materialized; only projections and tolerance-relative predicates exist.

Membership tests for the flat subspaces U B V_J^T through the base point
assume the wider-than-tall case is transposed first; the public functions do
that transposition internally.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, ThinSVD, as_matrix


@dataclass(frozen=True)
class ConeQuery:
    """Base-point context for cone tests: ranked SVD, rank bound, tolerance."""

    svd: ThinSVD
    r: int
    tol: float = DEFAULT_TOL
    s: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "s", self.svd.rank)
        if self.s > self.r:
            raise ValueError(
                f"base point has numerical rank {self.s} above the bound r={self.r}"
            )
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class IndexSetJ:
    """A size-r column index set containing the base point's prefix 0..s-1."""

    indices: tuple
    s: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if sorted(set(idx)) != sorted(idx):
            raise ValueError("index set has repeated entries")
        if not set(range(self.s)).issubset(idx):
            raise ValueError("index set must contain the rank prefix 0..s-1")
        object.__setattr__(self, "indices", idx)


def enumerate_J(s: int, n: int, r: int, cap: int = 10**6) -> list:
    """All C(n-s, r-s) size-r supersets of the prefix 0..s-1, lexicographic."""
    if not 0 <= s <= r <= n:
        raise ValueError(f"need 0 <= s <= r <= n, got s={s}, r={r}, n={n}")
    count = math.comb(n - s, r - s)
    if count > cap:
        raise ValueError(f"enumeration of {count} index sets exceeds cap {cap}")
    prefix = tuple(range(s))
    return [IndexSetJ(prefix + combo, s)
            for combo in itertools.combinations(range(s, n), r - s)]


def _check_ambient(svd: ThinSVD, Z, name="Z") -> np.ndarray:
    Z = as_matrix(Z, name)
    if Z.shape != (svd.m, svd.n):
        raise ValueError(f"{name} has shape {Z.shape}, expected {(svd.m, svd.n)}")
    return Z


def project_tangent_fixed_rank(svd: ThinSVD, Z) -> np.ndarray:
    """Pu Z Pv + Pu Z Pv_perp + Pu_perp Z Pv with Pu = U_g U_g^T etc."""
    Z = _check_ambient(svd, Z)
    if svd.rank == 0:
        return np.zeros_like(Z)
    ug, vg = svd.u_gamma, svd.v_gamma
    zu = ug @ (ug.T @ Z)          # Pu Z
    zv = (Z @ vg) @ vg.T          # Z Pv
    zuv = ug @ ((ug.T @ Z) @ vg) @ vg.T
    return zu + zv - zuv


def project_normal_fixed_rank(svd: ThinSVD, Z) -> np.ndarray:
    """Pu_perp Z Pv_perp, the complement of the tangent projection."""
    Z = _check_ambient(svd, Z)
    up, vp = svd.u_perp, svd.v_perp
    return up @ (up.T @ Z @ vp) @ vp.T


def in_tangent_bouligand_Mr(q: ConeQuery, H) -> bool:
    """H is tangent iff its normal component has rank at most r - s.

    The rank decision is taken relative to the scale of H itself, not of its
    (possibly vanishing) normal part, so exactly tangent directions pass.
    """
    H = _check_ambient(q.svd, H, "H")
    N = project_normal_fixed_rank(q.svd, H)
    sv_h = np.linalg.svd(H, compute_uv=False)
    top = float(sv_h[0]) if sv_h.size else 0.0
    if top == 0.0:
        return True
    sv = np.linalg.svd(N, compute_uv=False)
    rank_n = int(np.count_nonzero(sv > q.svd.rank_tol * top))
    return rank_n <= q.r - q.s


def in_normal_frechet_Mr(q: ConeQuery, W) -> bool:
    """Frechet normality: tangential part vanishes if s == r, else W = O."""
    W = _check_ambient(q.svd, W, "W")
    scale = max(1.0, float(np.linalg.norm(W)))
    if q.s == q.r:
        t = project_tangent_fixed_rank(q.svd, W)
        return float(np.linalg.norm(t)) <= q.tol * scale
    return float(np.linalg.norm(W)) <= q.tol * scale


def in_normal_mordukhovich_Mr(q: ConeQuery, W) -> bool:
    """Tangential part vanishes and rank(W) <= min(m, n) - r."""
    W = _check_ambient(q.svd, W, "W")
    scale = max(1.0, float(np.linalg.norm(W)))
    t = project_tangent_fixed_rank(q.svd, W)
    if float(np.linalg.norm(t)) > q.tol * scale:
        return False
    sv = np.linalg.svd(W, compute_uv=False)
    top = float(sv[0]) if sv.size else 0.0
    rank_w = int(np.count_nonzero(sv > q.svd.rank_tol * top)) if top > 0 else 0
    return rank_w <= min(q.svd.m, q.svd.n) - q.r


def in_normal_MXJ(svd: ThinSVD, J, W, tol: float = DEFAULT_TOL) -> bool:
    """Normal-space test for the flat U B V_J^T through X: U^T W V_J = O."""
    if svd.m < svd.n:
        return in_normal_MXJ(svd.transposed(), J, as_matrix(W, "W").T, tol)
    W = _check_ambient(svd, W, "W")
    idx = J.indices if isinstance(J, IndexSetJ) else tuple(int(i) for i in J)
    if not set(range(svd.rank)).issubset(idx):
        raise ValueError("index set must contain the rank prefix of the base point")
    if idx and max(idx) >= svd.n:
        raise ValueError("index set exceeds the number of columns")
    vj = svd.v[:, list(idx)]
    resid = float(np.linalg.norm(svd.u.T @ W @ vj))
    return resid <= tol * max(1.0, float(np.linalg.norm(W)))


def in_normal_frechet_MXr(q: ConeQuery, W) -> bool:
    """Frechet normal cone of the union of flats: U^T W V_g = O if s == r, else W = O."""
    if q.svd.m < q.svd.n:
        qt = ConeQuery(q.svd.transposed(), q.r, q.tol)
        return in_normal_frechet_MXr(qt, as_matrix(W, "W").T)
    W = _check_ambient(q.svd, W, "W")
    scale = max(1.0, float(np.linalg.norm(W)))
    if q.s == q.r:
        resid = float(np.linalg.norm(q.svd.u.T @ W @ q.svd.v_gamma))
        return resid <= q.tol * scale
    return float(np.linalg.norm(W)) <= q.tol * scale
