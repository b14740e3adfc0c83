"""Builders for the bundled application instances and problem-file round trips.

The problem file is a UTF-8 JSON document:

    {
      "m": 3, "n": 3, "l": 4, "r": 2,
      "rank_tol": 1e-08, "tol": 1e-08,
      "objective": {"kind": "frobenius_distance", "target": [[...], ...]},
      "constraints": [{"matrix": [[...], ...], "rhs": 0.0}, ...],
      "named_points": [{"label": "Xbar", "matrix": [[...], ...]}, ...]
    }

Matrices are row-major nested arrays of decimal literals. Named points let
an instance carry its interesting candidates along.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .affine import AffineMap
from .errors import ProblemFormatError
from .linalg import DEFAULT_RANK_TOL, DEFAULT_TOL, RankBound, as_matrix
from .model import (FrobeniusDistance, LinearTrace, ProblemSpec, RowQuadratic,
                    objective_from_doc, objective_to_doc)


@dataclass(frozen=True)
class HankelInstance:
    """Nearest rank-bounded Hankel matrix to a target; l = (m-1)(n-1)."""

    h_target: np.ndarray
    r: int

    def __post_init__(self):
        object.__setattr__(self, "h_target", as_matrix(self.h_target, "h_target"))
        m, n = self.h_target.shape
        if m < 2 or n < 2:
            raise ValueError("Hankel structure needs at least a 2 x 2 matrix")
        RankBound(self.r).check_shape(m, n)

    def build(self, rank_tol: float = DEFAULT_RANK_TOL,
              tol: float = DEFAULT_TOL) -> ProblemSpec:
        return ProblemSpec(
            objective=FrobeniusDistance(self.h_target),
            affine=hankel_constraints(*self.h_target.shape),
            rank_bound=RankBound(self.r),
            rank_tol=rank_tol, tol=tol,
        )


@dataclass(frozen=True)
class LRRInstance:
    """Row-quadratic objective with unit row sums; one constraint per row."""

    b_mats: tuple
    r: int

    def __post_init__(self):
        mats = tuple(as_matrix(b, f"B^{i + 1}") for i, b in enumerate(self.b_mats))
        if not mats:
            raise ValueError("need at least one row matrix")
        n = mats[0].shape[0]
        for i, b in enumerate(mats):
            if b.shape != (n, n):
                raise ValueError(f"B^{i + 1} has shape {b.shape}, expected ({n}, {n})")
        if len(mats) != n:
            raise ValueError(f"expected {n} row matrices, got {len(mats)}")
        object.__setattr__(self, "b_mats", mats)
        RankBound(self.r).check_shape(n, n)

    def build(self, rank_tol: float = DEFAULT_RANK_TOL,
              tol: float = DEFAULT_TOL) -> ProblemSpec:
        n = len(self.b_mats)
        mats = []
        for i in range(n):
            e = np.zeros((n, n))
            e[i, :] = 1.0
            mats.append(e)
        return ProblemSpec(
            objective=RowQuadratic(self.b_mats),
            affine=AffineMap(mats, np.ones(n)),
            rank_bound=RankBound(self.r),
            rank_tol=rank_tol, tol=tol,
        )


def hankel_constraints(m: int, n: int) -> AffineMap:
    """Anti-diagonal equalities X[k, j] = X[k-1, j+1], (m-1)(n-1) of them.

    Index order is row-major over k = 2..m then j = 1..n-1 (one-based), so
    every referenced unit vector exists.
    """
    mats = []
    for k in range(1, m):
        for j in range(n - 1):
            a = np.zeros((m, n))
            a[k, j] = 1.0
            a[k - 1, j + 1] = -1.0
            mats.append(a)
    return AffineMap(mats, np.zeros(len(mats)))


def build_hankel(h_target, r: int, rank_tol: float = DEFAULT_RANK_TOL,
                 tol: float = DEFAULT_TOL) -> ProblemSpec:
    """Problem: minimize 0.5 ||X - H||_F^2 over Hankel matrices of rank <= r."""
    return HankelInstance(h_target, r).build(rank_tol, tol)


def build_lrr(b_mats, r: int, rank_tol: float = DEFAULT_RANK_TOL,
              tol: float = DEFAULT_TOL) -> ProblemSpec:
    """Problem: minimize 0.5 sum_i w_i B^i w_i^T with unit row sums, rank <= r."""
    return LRRInstance(tuple(b_mats), r).build(rank_tol, tol)


def build_hankel_example():
    """The 3 x 3 rank-2 Hankel approximation instance with its named points.

    Xbar is the rank-2 Hankel matrix nearest the target; Xtilde is the best
    point on the coordinate line {t * e1 e1^T} of the rank-1 variant.
    """
    H = np.array([[112.0, 7.5, 0.0],
                  [7.5, 0.0, 0.0],
                  [0.0, 0.0, 1e-6]])
    xbar = H.copy()
    xbar[2, 2] = 0.0
    xtilde = np.zeros((3, 3))
    xtilde[0, 0] = 112.0
    return build_hankel(H, 2), {"Xbar": xbar, "Xtilde": xtilde}


def build_diagonal_example():
    """3 x 3 instance: minimize X22 over a pinned diagonal pattern, rank <= 2.

    Constraints force X11 = X22, X33 = 1 and all off-diagonal entries to
    zero; the unique feasible global minimizer e3 e3^T has rank 1 < 2.
    """
    e = np.eye(3)
    mats = [np.outer(e[0], e[0]) - np.outer(e[1], e[1]),
            np.outer(e[2], e[2])]
    rhs = [0.0, 1.0]
    for i in range(3):
        for j in range(3):
            if i != j:
                mats.append(np.outer(e[i], e[j]))
                rhs.append(0.0)
    spec = ProblemSpec(
        objective=LinearTrace(np.outer(e[1], e[1])),
        affine=AffineMap(mats, rhs),
        rank_bound=RankBound(2),
    )
    return spec, {"Xbar": np.outer(e[2], e[2])}


def build_trace_example():
    """4 x 4 instance: nearest matrix to H with trace 2 and rank <= 3.

    H has column 3 equal to -e3 and is zero elsewhere. The named candidates
    X1..X3 are coordinate projections of trace 2; X4 = (2/3)(e1e1^T + e2e2^T
    + e4e4^T) is the distinguished one.
    """
    e = np.eye(4)
    H = np.zeros((4, 4))
    H[2, 2] = -1.0
    spec = ProblemSpec(
        objective=FrobeniusDistance(H),
        affine=AffineMap([np.eye(4)], [2.0]),
        rank_bound=RankBound(3),
    )
    points = {
        "H": H,
        "X1": np.diag([1.0, 1.0, 0.0, 0.0]),
        "X2": np.diag([0.0, 1.0, 0.0, 1.0]),
        "X3": np.diag([1.0, 0.0, 0.0, 1.0]),
        "X4": (2.0 / 3.0) * np.diag([1.0, 1.0, 0.0, 1.0]),
    }
    return spec, points


def _matrix_from_doc(doc, m, n, where):
    try:
        arr = np.asarray(doc, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{where}: not a numeric matrix") from exc
    if arr.shape != (m, n):
        raise ProblemFormatError(f"{where}: shape {arr.shape} differs from ({m}, {n})")
    if not np.all(np.isfinite(arr)):
        raise ProblemFormatError(f"{where}: non-finite entries")
    return arr


def save_problem(prob: ProblemSpec, path, named_points=None) -> None:
    """Write the problem document; round-trips through load_problem."""
    doc = {
        "m": prob.m,
        "n": prob.n,
        "l": prob.l,
        "r": prob.r,
        "rank_tol": prob.rank_tol,
        "tol": prob.tol,
        "objective": objective_to_doc(prob.objective),
        "constraints": [
            {"matrix": a.tolist(), "rhs": float(b)}
            for a, b in zip(prob.affine.mats, prob.affine.rhs)
        ],
        "named_points": [
            {"label": str(k), "matrix": as_matrix(v, k).tolist()}
            for k, v in (named_points or {}).items()
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class LoadedProblem:
    spec: ProblemSpec
    named_points: dict


def load_problem(path) -> LoadedProblem:
    """Parse and validate a problem document; raises ProblemFormatError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ProblemFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    if not isinstance(doc, dict):
        raise ProblemFormatError(f"{path}: top level must be an object")

    def need(key, types):
        if key not in doc:
            raise ProblemFormatError(f"{path}: missing field {key!r}")
        if not isinstance(doc[key], types):
            raise ProblemFormatError(f"{path}: field {key!r} has the wrong type")
        return doc[key]

    m = need("m", int)
    n = need("n", int)
    if m < 1 or n < 1:
        raise ProblemFormatError(f"{path}: m and n must be positive")
    l = need("l", int)
    r = need("r", int)
    if not 0 <= r < min(m, n):
        raise ProblemFormatError(
            f"{path}: rank bound r={r} must satisfy 0 <= r < min(m, n)={min(m, n)}"
        )
    rank_tol = float(need("rank_tol", (int, float)))
    tol = float(need("tol", (int, float)))
    constraints = need("constraints", list)
    if len(constraints) != l:
        raise ProblemFormatError(
            f"{path}: l={l} but {len(constraints)} constraints listed"
        )
    mats, rhs = [], []
    for i, c in enumerate(constraints):
        if not isinstance(c, dict) or "matrix" not in c or "rhs" not in c:
            raise ProblemFormatError(
                f"{path}: constraints[{i}] needs 'matrix' and 'rhs'"
            )
        mats.append(_matrix_from_doc(c["matrix"], m, n, f"{path}: constraints[{i}]"))
        rhs.append(float(c["rhs"]))
    try:
        objective = objective_from_doc(need("objective", dict))
    except (KeyError, ValueError) as exc:
        raise ProblemFormatError(f"{path}: objective: {exc}") from exc
    if objective.shape != (m, n):
        raise ProblemFormatError(
            f"{path}: objective shape {objective.shape} differs from ({m}, {n})"
        )
    points = {}
    for i, p in enumerate(doc.get("named_points", [])):
        if not isinstance(p, dict) or "label" not in p or "matrix" not in p:
            raise ProblemFormatError(
                f"{path}: named_points[{i}] needs 'label' and 'matrix'"
            )
        points[str(p["label"])] = _matrix_from_doc(
            p["matrix"], m, n, f"{path}: named_points[{i}]"
        )
    try:
        spec = ProblemSpec(
            objective=objective,
            affine=AffineMap(mats, rhs, shape=(m, n)),
            rank_bound=RankBound(r),
            rank_tol=rank_tol, tol=tol,
        )
    except ValueError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc
    return LoadedProblem(spec=spec, named_points=points)
