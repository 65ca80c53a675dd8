"""First-order SDP solver with certified dual bounds.

An ADMM method on the dual augmented Lagrangian for general-form
semidefinite programs (inequalities, equalities, optional elementwise
nonnegativity), an LP-based post-processing step that certifies valid
bounds on the optimum by weak duality, theta-family graph relaxations
over DIMACS inputs, a random instance generator with planted optima,
and a benchmark harness with performance profiles.
"""

from .bounds import BoundStatus, DualBound, make_bound_callback, recover_bound
from .core import (ConstraintSense, GeneralSdp, LinearConstraint, Sense,
                   SparseSymMat, apply_A, apply_At, read_instance,
                   with_added_inequalities, write_instance)
from .graphs import Graph, complement, parse_dimacs, read_dimacs
from .profiles import ProfileCurve, perf_profile, plot_profiles
from .randgen import GenSpec, RandomInstance, generate
from .relaxations import (build_theta, build_theta_bar_plus, build_theta_plus,
                          sample_triangle_cuts)
from .solver import (BoundRequest, SolverConfig, SolverResult, SolverStatus,
                     psd_split, residuals, solve)

__version__ = "0.1.0"

__all__ = [
    "BoundRequest", "BoundStatus", "ConstraintSense", "DualBound", "GenSpec",
    "GeneralSdp", "Graph", "LinearConstraint", "ProfileCurve",
    "RandomInstance", "Sense", "SolverConfig", "SolverResult", "SolverStatus",
    "SparseSymMat", "apply_A", "apply_At", "build_theta",
    "build_theta_bar_plus", "build_theta_plus", "complement", "generate",
    "make_bound_callback", "parse_dimacs", "perf_profile", "plot_profiles",
    "psd_split", "read_dimacs", "read_instance", "recover_bound", "residuals",
    "sample_triangle_cuts", "solve", "with_added_inequalities",
    "write_instance", "__version__",
]
