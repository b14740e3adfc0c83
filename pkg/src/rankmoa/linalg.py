"""Dense matrix primitives: tolerance-ranked thin SVD, low-rank projection, norms.

Every rank decision in the package is relative: a singular value counts
toward the numerical rank when it exceeds ``rank_tol * sigma_1`` of the
matrix being ranked. The cone and qualification modules reuse this single
notion of numerical rank.

All functions are pure; returned arrays should be treated as read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-8
DEFAULT_TOL = 1e-8


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite 2-d float array."""
    X = np.asarray(x, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} has non-finite entries")
    return X


@dataclass(frozen=True)
class RankBound:
    """Prescribed upper bound on admissible rank; must stay below min(m, n)."""

    r: int

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 0:
            raise ValueError(f"rank bound must be a nonnegative integer, got {self.r!r}")
        object.__setattr__(self, "r", int(self.r))

    def check_shape(self, m: int, n: int) -> None:
        if self.r >= min(m, n):
            raise ValueError(
                f"rank bound r={self.r} must be smaller than min(m, n)={min(m, n)}"
            )


def _coerce_rank(r) -> int:
    return r.r if isinstance(r, RankBound) else int(r)


@dataclass(frozen=True)
class ThinSVD:
    """Square-factor SVD with a tolerance-based numerical rank.

    ``u`` (m x m) and ``v`` (n x n) are orthogonal, ``sigma`` holds all
    min(m, n) singular values in nonincreasing order, and ``gamma`` indexes
    the values above ``rank_tol * sigma[0]``. Because sigma is sorted, gamma
    is always a prefix of 0..min(m, n)-1; the columns it selects from u and v
    span the row/column spaces, the remaining columns their complements.
    """

    u: np.ndarray
    v: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray
    rank_tol: float

    @property
    def m(self) -> int:
        return self.u.shape[0]

    @property
    def n(self) -> int:
        return self.v.shape[0]

    @property
    def rank(self) -> int:
        return int(self.gamma.size)

    @property
    def threshold(self) -> float:
        """Absolute singular-value cutoff actually applied."""
        top = float(self.sigma[0]) if self.sigma.size else 0.0
        return self.rank_tol * top

    @property
    def sigma_gamma(self) -> np.ndarray:
        return self.sigma[: self.rank]

    @property
    def u_gamma(self) -> np.ndarray:
        return self.u[:, : self.rank]

    @property
    def v_gamma(self) -> np.ndarray:
        return self.v[:, : self.rank]

    @property
    def u_perp(self) -> np.ndarray:
        return self.u[:, self.rank :]

    @property
    def v_perp(self) -> np.ndarray:
        return self.v[:, self.rank :]

    def reconstruct(self) -> np.ndarray:
        k = min(self.m, self.n)
        return (self.u[:, :k] * self.sigma) @ self.v[:, :k].T

    def transposed(self) -> "ThinSVD":
        """The factorization of the transpose (u and v swap roles)."""
        return ThinSVD(u=self.v, v=self.u, sigma=self.sigma, gamma=self.gamma,
                       rank_tol=self.rank_tol)


def thin_svd(X, rank_tol: float = DEFAULT_RANK_TOL) -> ThinSVD:
    """Full SVD of X with the index set of numerically nonzero singular values."""
    X = as_matrix(X)
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    u, s, vh = np.linalg.svd(X, full_matrices=True)
    cutoff = rank_tol * (float(s[0]) if s.size else 0.0)
    gamma = np.flatnonzero(s > cutoff)
    return ThinSVD(u=u, v=vh.T, sigma=s, gamma=gamma, rank_tol=float(rank_tol))


def orient_svd(X, rank_tol: float = DEFAULT_RANK_TOL) -> ThinSVD:
    """thin_svd plus a deterministic sign convention on the singular vectors.

    In each (u_k, v_k) pair the entry of largest magnitude in the u column is
    made nonnegative (np.argmax breaks ties at the lowest row index); flipping
    u and v together preserves the factorization. Unpaired columns beyond
    min(m, n) are oriented on their own.
    """
    f = thin_svd(X, rank_tol)
    u = f.u.copy()
    v = f.v.copy()
    k = min(f.m, f.n)
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            if j < k:
                v[:, j] = -v[:, j]
    for j in range(k, v.shape[1]):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0:
            v[:, j] = -v[:, j]
    return ThinSVD(u=u, v=v, sigma=f.sigma, gamma=f.gamma, rank_tol=f.rank_tol)


def pseudo_inverse(svd: ThinSVD) -> np.ndarray:
    """Moore-Penrose inverse from the ranked factors; zero matrix when rank 0."""
    if svd.rank == 0:
        return np.zeros((svd.n, svd.m))
    return (svd.v_gamma / svd.sigma_gamma) @ svd.u_gamma.T


def project_low_rank(Z, r, rank_tol: float = DEFAULT_RANK_TOL):
    """Nearest matrix of rank at most r in Frobenius norm, by truncation.

    Returns (projection, tie_flag). The tie flag is set when
    sigma_r <= sigma_{r+1} + cutoff, in which case the projection is not
    unique and the returned representative is the one from orient_svd.
    """
    Z = as_matrix(Z)
    r = _coerce_rank(r)
    k = min(Z.shape)
    if not 0 <= r <= k:
        raise ValueError(f"rank bound r={r} out of range for shape {Z.shape}")
    f = orient_svd(Z, rank_tol)
    kept = f.sigma.copy()
    kept[r:] = 0.0
    P = (f.u[:, :k] * kept) @ f.v[:, :k].T
    tie = bool(0 < r < k and f.sigma[r - 1] <= f.sigma[r] + f.threshold)
    return P, tie


def spectral_norm(X) -> float:
    """Largest singular value."""
    X = as_matrix(X)
    if 0 in X.shape:
        return 0.0
    return float(np.linalg.svd(X, compute_uv=False)[0])


def rank_estimate(X, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above rank_tol * sigma_1."""
    X = as_matrix(X)
    if 0 in X.shape:
        return 0
    s = np.linalg.svd(X, compute_uv=False)
    return int(np.count_nonzero(s > rank_tol * s[0]))
