"""Eigenpairs and eigenvalue localization for a nonlocal fractional thermostat problem.

The boundary value problem

    D^alpha u(t) + lambda f(t, u(t)) = 0,           0 < t < 1,
    u'(0) + lambda H1[u] = 0,
    beta D^(alpha-1) u(1) + u(eta) = lambda H2[u],

with Caputo derivatives, 1 < alpha <= 2, is rewritten as u = lambda T(u) for a
perturbed Hammerstein operator T.  The package parses problem files, builds T,
finds eigenpairs with a prescribed sup-norm and brackets their eigenvalues.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BreakdownZeroNorm,
    FracThermoError,
    HypothesisFail,
    NonConvergence,
    ParseError,
)
from .specparse import ProblemSpec, load_problem, parse_expr, parse_problem  # noqa: F401
from .kernelcore import classify, gamma_fn, kernel_K, thresholds  # noqa: F401
from .hammerstein import GridFunction, apply_T  # noqa: F401
from .eigensolver import SolveOptions, check_cone, solve_eigenpair, verify_residuals  # noqa: F401
from .bounds import compute_L_U, sector_bounds, sweep  # noqa: F401
