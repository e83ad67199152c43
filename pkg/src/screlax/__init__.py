"""Successive convex relaxation toolkit for complementarity problems.

Layers, bottom up: ``lp`` (bounded-variable simplex with certificates,
eigenvector cutting planes, exact rational fallback), ``instance`` and
``formulations`` (problem data, base polytopes, enumeration oracle),
``relaxation`` (lifted LP/SDP operators and cone-certificate hierarchies),
``disjunctive`` (facet strengthening, union operator, dominance reports),
and ``cli`` (command-line front end).

Numeric kernels run under numba when available; set SCRELAX_BACKEND=numpy
to force the pure-numpy path, SCRELAX_LOG to pick the CLI log level.
"""

from .geometry import FacetList, QuadraticFunction
from .instance import (LcpInstance, LcpSolution, default_bound,
                       enumerate_solutions, hull_support, load_instance,
                       random_instance, save_instance, verify_solution)
from .lp import (LinearProgram, LpError, LpResult, LpStallError, LpStatus,
                 PsdBlock, SymmetricMatrixVar, min_eigpair, solve_lp,
                 solve_many, solve_with_psd)

__version__ = "0.1.0"

__all__ = [
    "FacetList",
    "LcpInstance",
    "LcpSolution",
    "LinearProgram",
    "LpError",
    "LpResult",
    "LpStallError",
    "LpStatus",
    "PsdBlock",
    "QuadraticFunction",
    "SymmetricMatrixVar",
    "default_bound",
    "enumerate_solutions",
    "hull_support",
    "load_instance",
    "min_eigpair",
    "random_instance",
    "save_instance",
    "solve_lp",
    "solve_many",
    "solve_with_psd",
    "verify_solution",
    "__version__",
]
