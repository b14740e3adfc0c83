"""First-order stationarity tests with multiplier recovery.

Three nested notions are certified at a feasible point X of rank s:

* F-stationary: -grad_X L(X; y) lies in the Frechet normal cone of the
  low-rank set for some multiplier y. For s == r this means the tangential
  part of the Lagrangian gradient vanishes; for s < r the whole gradient
  must vanish.
* alpha-stationary: X is a fixed point of the rank-r projected gradient step
  on the Lagrangian with step alpha. Equivalent characterization: the
  Lagrangian gradient is normal and its spectral norm is at most
  sigma_r(X) / alpha (s == r), or vanishes (s < r).
* M-stationary: -grad_X L in the Mordukhovich normal cone, i.e. tangential
  part vanishes and rank(grad_X L) <= min(m, n) - r.

Multipliers are recovered by minimum-norm least squares; M-stationarity over
the affine family of multipliers is only certified at the tested y values.
Infeasible inputs produce reports with all verdicts false, never exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cones import project_normal_fixed_rank, project_tangent_fixed_rank
from .linalg import ThinSVD, as_matrix, orient_svd, rank_estimate, spectral_norm
from .model import ProblemSpec
from .qualification import CASE_FULL_RANK, CASE_RANK_DEFICIENT, bq_certificates


@dataclass
class StationarityReport:
    feasible: bool
    feasibility_residual: float
    s: int
    y: np.ndarray | None = None
    grad_lagrangian: np.ndarray | None = None
    f_residual: float | None = None
    is_F: bool = False
    is_M: bool = False
    alpha_tested: float | None = None
    is_alpha: bool | None = None
    beta: float | None = None
    classification: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        beta = self.beta
        if beta is not None and math.isinf(beta):
            beta = "inf"
        return {
            "feasible": self.feasible,
            "feasibility_residual": self.feasibility_residual,
            "s": self.s,
            "y": None if self.y is None else self.y.tolist(),
            "grad_lagrangian": None if self.grad_lagrangian is None
            else self.grad_lagrangian.tolist(),
            "f_residual": self.f_residual,
            "is_F": self.is_F,
            "is_M": self.is_M,
            "alpha_tested": self.alpha_tested,
            "is_alpha": self.is_alpha,
            "beta": beta,
            "classification": list(self.classification),
            "notes": list(self.notes),
        }


def lagrangian(prob: ProblemSpec, X, y) -> float:
    """f(X) + sum_i y_i (<A^i, X> - b_i)."""
    X = as_matrix(X, "X")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return prob.objective.value(X) + float(y @ (prob.affine.apply(X) - prob.affine.rhs))


def lagrangian_grad(prob: ProblemSpec, X, y) -> np.ndarray:
    """grad f(X) + sum_i y_i A^i."""
    X = as_matrix(X, "X")
    return prob.objective.grad(X) + prob.affine.adjoint(y)


def _feasible(prob: ProblemSpec, X, svd: ThinSVD):
    res = prob.affine.residual(X)
    scale = max(1.0, float(np.linalg.norm(prob.affine.rhs)))
    return (res <= prob.tol * scale) and (svd.rank <= prob.r), res


def _grad_scale(g: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(g)))


def _recover_multiplier(prob: ProblemSpec, svd: ThinSVD, g: np.ndarray,
                        tangential: bool):
    """Minimum-norm minimizer of the (projected) Lagrangian-gradient norm."""
    if tangential:
        cols = [project_tangent_fixed_rank(svd, a).ravel() for a in prob.affine.mats]
        target = -project_tangent_fixed_rank(svd, g).ravel()
    else:
        cols = [a.ravel() for a in prob.affine.mats]
        target = -g.ravel()
    if not cols:
        return np.zeros(0), float(np.linalg.norm(target))
    C = np.column_stack(cols)
    y, *_ = np.linalg.lstsq(C, target, rcond=None)
    resid = float(np.linalg.norm(C @ y - target))
    return y, resid


def check_F_stationary(prob: ProblemSpec, X) -> StationarityReport:
    """F-stationarity with least-squares multiplier recovery.

    s == r: minimize the tangential norm of grad f + adjoint(y) over y.
    s <  r: minimize the full norm (the Frechet cone collapses to {O}).
    """
    X = as_matrix(X, "X")
    svd = orient_svd(X, prob.rank_tol)
    feasible, feas_res = _feasible(prob, X, svd)
    rep = StationarityReport(feasible=feasible, feasibility_residual=feas_res,
                             s=svd.rank)
    if not feasible:
        return rep
    g = prob.objective.grad(X)
    y, resid = _recover_multiplier(prob, svd, g, tangential=(svd.rank == prob.r))
    rep.y = y
    rep.f_residual = resid
    rep.grad_lagrangian = g + prob.affine.adjoint(y)
    rep.is_F = resid <= prob.tol * _grad_scale(g)
    return rep


def check_alpha_stationary(prob: ProblemSpec, X, y, alpha: float,
                           method: str = "characterization") -> bool:
    """Fixed point of the rank-r projected gradient step with step alpha.

    ``method="characterization"`` uses the normality-plus-spectral-bound
    form; ``method="projection"`` recomputes the projection distance, which
    stays correct when the truncation is not unique (tie-aware: X passes if
    it attains the optimal distance).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    X = as_matrix(X, "X")
    svd = orient_svd(X, prob.rank_tol)
    feasible, _ = _feasible(prob, X, svd)
    if not feasible:
        return False
    gradL = lagrangian_grad(prob, X, y)
    scale = _grad_scale(prob.objective.grad(X))
    if prob.r == 0:
        return True  # the only rank-0 matrix is X = O, a fixed point of any step
    if method == "projection":
        Z = X - alpha * gradL
        sv = np.linalg.svd(Z, compute_uv=False)
        best = float(np.sqrt(np.sum(sv[prob.r:] ** 2)))
        dist = alpha * float(np.linalg.norm(gradL))
        return abs(dist - best) <= prob.tol * max(1.0, float(np.linalg.norm(Z)))
    if method != "characterization":
        raise ValueError(f"unknown method {method!r}")
    if svd.rank == prob.r:
        tang = float(np.linalg.norm(project_tangent_fixed_rank(svd, gradL)))
        if tang > prob.tol * scale:
            return False
        sigma_r = float(svd.sigma[prob.r - 1])
        return spectral_norm(gradL) <= sigma_r / alpha + prob.tol
    return float(np.linalg.norm(gradL)) <= prob.tol * scale


def beta_bound(prob: ProblemSpec, X, y) -> float:
    """sigma_r(X) / ||grad_X L||_2; infinity when the gradient vanishes."""
    X = as_matrix(X, "X")
    gradL = lagrangian_grad(prob, X, y)
    scale = _grad_scale(prob.objective.grad(X))
    if float(np.linalg.norm(gradL)) <= prob.tol * scale or prob.r == 0:
        return math.inf
    svd = orient_svd(X, prob.rank_tol)
    sigma_r = float(svd.sigma[prob.r - 1]) if prob.r <= svd.sigma.size else 0.0
    return sigma_r / spectral_norm(gradL)


def check_M_stationary(prob: ProblemSpec, X, y_hint=None):
    """M-stationarity at the supplied (or minimum-norm) multiplier.

    Returns (verdict, y). Only the tested multiplier certifies or refutes;
    the admissible family is affine and is not searched exhaustively.
    """
    X = as_matrix(X, "X")
    svd = orient_svd(X, prob.rank_tol)
    feasible, _ = _feasible(prob, X, svd)
    if not feasible:
        return False, None
    g = prob.objective.grad(X)
    if y_hint is None:
        y, _ = _recover_multiplier(prob, svd, g, tangential=True)
    else:
        y = np.atleast_1d(np.asarray(y_hint, dtype=float))
    gradL = g + prob.affine.adjoint(y)
    scale = _grad_scale(g)
    tang = float(np.linalg.norm(project_tangent_fixed_rank(svd, gradL)))
    if tang > prob.tol * scale:
        return False, y
    if float(np.linalg.norm(gradL)) <= prob.tol * scale:
        return True, y  # numerically zero gradient belongs to every normal cone
    ok = rank_estimate(gradL, prob.rank_tol) <= min(prob.m, prob.n) - prob.r
    return ok, y


def classify_first_order(prob: ProblemSpec, X, alpha: float | None = None) -> StationarityReport:
    """Aggregate first-order report with theorem-backed conclusions.

    When no step is supplied and the objective declares a strong-convexity
    modulus l_f, alpha-stationarity is probed at 1/l_f, the smallest step for
    which the uniqueness conclusion applies.
    """
    X = as_matrix(X, "X")
    rep = check_F_stationary(prob, X)
    if not rep.feasible:
        return rep
    svd = orient_svd(X, prob.rank_tol)
    ok_hint, _ = check_M_stationary(prob, X, y_hint=rep.y)
    rep.is_M = ok_hint or check_M_stationary(prob, X)[0]
    rep.beta = beta_bound(prob, X, rep.y)

    lf = prob.objective.strong_convexity_modulus
    a = alpha
    if a is None and lf:
        a = 1.0 / lf
    if a is not None:
        rep.alpha_tested = float(a)
        rep.is_alpha = check_alpha_stationary(prob, X, rep.y, a)
    unique_ok = False
    if lf:
        a_unique = 1.0 / lf
        if rep.alpha_tested is not None and rep.alpha_tested >= a_unique * (1 - 1e-12):
            unique_ok = bool(rep.is_alpha)
        else:  # the caller's step is below the uniqueness threshold; probe it
            unique_ok = check_alpha_stationary(prob, X, rep.y, a_unique)

    convex = prob.objective.convex
    cls = rep.classification
    if rep.is_F and convex:
        if rep.s < prob.r:
            cls.append("global minimizer (Thm 4.1 ii)")
        else:
            cls.append("global minimizer restricted on M_X(Γ) (Thm 4.1 ii)")
    if unique_ok:
        cls.append("unique global minimizer (Thm 4.2 ii)")
    if rep.is_M and convex and not rep.is_F:
        cls.append("global minimizer restricted on M_X(Γ) (Cor 4.1 ii)")

    qual = bq_certificates(svd, prob.affine, prob.r, min(prob.tol, prob.rank_tol))
    if qual.intersection_rule_case == CASE_FULL_RANK:
        k = 1
    elif qual.intersection_rule_case == CASE_RANK_DEFICIENT:
        k = 2
    else:
        k = None
    if k is not None:
        state = "satisfied" if rep.is_F else "violated"
        cls.append(f"necessary conditions {state} under Assumption {k} (Thm 4.1 i)")
        if not rep.is_F:
            rep.notes.append(
                "qualification is certified and F-stationarity fails, so the "
                "point cannot be a local minimizer"
            )
    else:
        rep.notes.append(
            "necessity not certified: neither qualification applies at this point"
        )
    return rep
