"""Optimality analysis for smooth minimization over low-rank matrices on an
affine manifold: cone projections and memberships, constraint-qualification
certificates, F-/alpha-/M-stationarity tests, second-order checks, and a
projected-gradient search."""

from .affine import AffineMap
from .cones import (ConeQuery, IndexSetJ, enumerate_J, in_normal_MXJ,
                    in_normal_frechet_MXr, in_normal_frechet_Mr,
                    in_normal_mordukhovich_Mr, in_tangent_bouligand_Mr,
                    project_normal_fixed_rank, project_tangent_fixed_rank)
from .errors import DivergenceError, ProblemFormatError, QualificationError
from .linalg import (DEFAULT_RANK_TOL, DEFAULT_TOL, RankBound, ThinSVD,
                     orient_svd, project_low_rank, pseudo_inverse,
                     rank_estimate, spectral_norm, thin_svd)
from .model import (CustomObjective, FrobeniusDistance, LinearTrace, Objective,
                    ProblemSpec, RowQuadratic, make_custom, register_objective)
from .problems import (HankelInstance, LoadedProblem, LRRInstance, build_diagonal_example,
                       build_hankel, build_hankel_example, build_lrr,
                       build_trace_example, load_problem, save_problem)
from .qualification import (QualificationReport, assumption1_holds,
                            assumption2_holds, bq_certificates, build_R, build_T,
                            frechet_normal_decomposition,
                            frechet_normal_of_feasible_set)
from .second_order import (SecondOrderReport, check_second_order, plain_quad,
                           riemannian_quad, tangent_intersection_basis)
from .solver import (SolveResult, SolverConfig, project_affine, solve,
                     stationarity_residual)
from .stationarity import (StationarityReport, beta_bound,
                           check_F_stationary, check_M_stationary,
                           check_alpha_stationary, classify_first_order,
                           lagrangian, lagrangian_grad)

__version__ = "0.1.0"
