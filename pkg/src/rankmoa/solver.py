"""Projected-gradient search for alpha-stationary points.

The base iteration is the rank-r projection of a gradient step. Nonempty
affine constraints are handled by one of two heuristics, clearly labeled as
such in the result:

* exact_projection: after each gradient step, alternate the closed-form
  affine projection and the rank-r truncation until the inner iterate stops
  moving (at least three rounds, capped); the returned iterate is
  affine-projected last so feasibility holds at report time. A fixed round
  count leaves an error floor: the gradient step re-enters the infeasible
  region by O(alpha * ||grad f||) every outer iteration, so the inner loop
  must re-converge rather than run a constant number of sweeps.
* quadratic_penalty: fold rho/2 * ||A(X) - b||^2 into the gradient and keep
  the plain rank-projected step.

Termination uses the alpha-stationarity residual with a freshly recovered
multiplier; the final point is classified by the first-order machinery.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .affine import AffineMap
from .cones import project_tangent_fixed_rank
from .errors import DivergenceError
from .linalg import DEFAULT_TOL, as_matrix, orient_svd, project_low_rank, spectral_norm
from .model import ProblemSpec
from .stationarity import (StationarityReport, _grad_scale, _recover_multiplier,
                           classify_first_order)

MODE_EXACT = "exact_projection"
MODE_PENALTY = "quadratic_penalty"
_INNER_MIN = 3
_INNER_CAP = 500
_DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.5
    max_iters: int = 10000
    stop_tol: float = 1e-10
    affine_mode: str = MODE_EXACT
    rho: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("step alpha must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.stop_tol <= 0:
            raise ValueError("stop_tol must be positive")
        if self.affine_mode not in (MODE_EXACT, MODE_PENALTY):
            raise ValueError(f"unknown affine_mode {self.affine_mode!r}")
        if self.affine_mode == MODE_PENALTY and self.rho <= 0:
            raise ValueError("penalty weight rho must be positive")


@dataclass
class SolveResult:
    x: np.ndarray
    report: StationarityReport
    log: list  # rows (iter, f, feas_residual, stat_residual)
    converged: bool
    iterations: int


def project_affine(amap: AffineMap, X) -> np.ndarray:
    """Frobenius-nearest matrix satisfying the constraints (least squares).

    Falls back to the least-squares projection with a warning when the
    constraint system is inconsistent.
    """
    X = as_matrix(X, "X")
    if amap.l == 0:
        return X
    target = amap.rhs - amap.apply(X)
    c, *_ = np.linalg.lstsq(amap.stack, target, rcond=None)
    gap = float(np.linalg.norm(amap.stack @ c - target))
    if gap > DEFAULT_TOL * max(1.0, float(np.linalg.norm(amap.rhs))):
        warnings.warn(
            "constraint system is inconsistent; returning the least-squares "
            "projection", RuntimeWarning, stacklevel=2,
        )
    return X + c.reshape(amap.shape)


def stationarity_residual(prob: ProblemSpec, X, alpha: float):
    """Scaled alpha-stationarity residual with a recovered multiplier.

    Combines the tangential (or full) Lagrangian-gradient norm, the excess of
    the spectral norm over sigma_r / alpha, and the feasibility residual.
    """
    X = as_matrix(X, "X")
    svd = orient_svd(X, prob.rank_tol)
    g = prob.objective.grad(X)
    scale = _grad_scale(g)
    feas = prob.affine.residual(X) / max(1.0, float(np.linalg.norm(prob.affine.rhs)))
    if prob.r == 0:
        return feas, np.zeros(prob.l)
    if svd.rank == prob.r:
        y, _ = _recover_multiplier(prob, svd, g, tangential=True)
        gradL = g + prob.affine.adjoint(y)
        tang = float(np.linalg.norm(project_tangent_fixed_rank(svd, gradL)))
        excess = max(0.0, spectral_norm(gradL) - float(svd.sigma[prob.r - 1]) / alpha)
        return (tang + excess) / scale + feas, y
    y, _ = _recover_multiplier(prob, svd, g, tangential=False)
    gradL = g + prob.affine.adjoint(y)
    return float(np.linalg.norm(gradL)) / scale + feas, y


def solve(prob: ProblemSpec, X0, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Iterate projected gradient steps until alpha-stationarity or max_iters."""
    X = as_matrix(X0, "X0")
    if X.shape != (prob.m, prob.n):
        raise ValueError(f"X0 has shape {X.shape}, expected {(prob.m, prob.n)}")
    log = []
    converged = False
    iterations = 0
    for k in range(1, cfg.max_iters + 1):
        iterations = k
        g = prob.objective.grad(X)
        if cfg.affine_mode == MODE_PENALTY:
            g = g + cfg.rho * prob.affine.adjoint(prob.affine.apply(X) - prob.affine.rhs)
            W = X - cfg.alpha * g
            W, _ = project_low_rank(W, prob.r, prob.rank_tol)
        else:
            W = X - cfg.alpha * g
            inner_tol = min(1e-13, 0.01 * cfg.stop_tol)
            for j in range(_INNER_CAP):
                prev = W
                W = project_affine(prob.affine, W)
                W, _ = project_low_rank(W, prob.r, prob.rank_tol)
                move = float(np.linalg.norm(W - prev))
                if j + 1 >= _INNER_MIN and move <= inner_tol * max(1.0, float(np.linalg.norm(W))):
                    break
        X = W
        f = prob.objective.value(X)
        if not np.isfinite(f) or f > _DIVERGENCE_LIMIT:
            raise DivergenceError(f"objective reached {f:.3e} at iteration {k}")
        stat, _ = stationarity_residual(prob, X, cfg.alpha)
        log.append((k, f, prob.affine.residual(X), stat))
        if stat <= cfg.stop_tol:
            converged = True
            break
    if cfg.affine_mode == MODE_EXACT:
        X = project_affine(prob.affine, X)
    report = classify_first_order(prob, X, alpha=cfg.alpha)
    return SolveResult(x=X, report=report, log=log, converged=converged,
                       iterations=iterations)


def write_iterate_log(path, log) -> None:
    """Emit the iterate log as comma-delimited text with a header row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,f,feas_residual,stat_residual\n")
        for k, f, feas, stat in log:
            fh.write(f"{k},{f!r},{feas!r},{stat!r}\n")
