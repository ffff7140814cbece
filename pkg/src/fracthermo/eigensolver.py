"""Eigenpairs u = lambda T(u) with prescribed sup-norm, and their verification.

The iteration is the normalized fixed-point map

    u_{k+1} = rho T(u_k) / ||T(u_k)||,    lambda_{k+1} = rho / ||T(u_k)||,

whose fixed points are exactly the eigenpairs on the sphere ||u|| = rho.
Existence results say nothing about its convergence, so
:class:`~fracthermo.errors.NonConvergence` is an ordinary outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BreakdownZeroNorm, NonConvergence
from .hammerstein import GridFunction, build_operator, eval_functional, sup_norm
from .kernelcore import CASE2, CaseData, classify, gamma_line, resolve_beta
from .quadops import DEFAULT_RULE, QuadratureRule, caputo_high, caputo_low, slope_at_zero
from .specparse import ProblemSpec, eval_expr

SEED_PROFILES = ("constant", "gamma", "sigma")

#: interior window for the ODE residual
ODE_WINDOW = (0.05, 0.95)


@dataclass(frozen=True)
class SolveOptions:
    n: int = 1025
    rule: QuadratureRule = DEFAULT_RULE
    tol: float = 1e-10
    max_iter: int = 500
    seed_profile: str = "constant"
    theta: float = 1.0
    b: Optional[float] = None

    def __post_init__(self):
        if self.seed_profile not in SEED_PROFILES:
            raise ValueError(f"seed_profile must be one of {SEED_PROFILES}")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("relaxation factor theta must lie in (0, 1]")


@dataclass(frozen=True)
class Tolerances:
    fp: float = 1e-8
    bc1: float = 1e-3
    bc2: float = 1e-2
    ode: float = 1e-1


@dataclass
class ResidualReport:
    fp: float
    bc1: float
    bc2: float
    ode: float
    ode_full: float
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def flags(self) -> dict:
        """``True`` for every residual above its tolerance."""
        tol = self.tolerances
        return {
            "fp": self.fp > tol.fp,
            "bc1": self.bc1 > tol.bc1,
            "bc2": self.bc2 > tol.bc2,
            "ode": self.ode > tol.ode,
        }

    @property
    def ok(self) -> bool:
        return not any(self.flags.values())


@dataclass
class Eigenpair:
    lam: float
    u: GridFunction
    rho: float
    iterations: int
    fp_residual: float
    bc1_residual: float = float("nan")
    bc2_residual: float = float("nan")
    ode_residual: float = float("nan")
    ode_residual_full: float = float("nan")


@dataclass(frozen=True)
class ConeReport:
    case_id: str
    sigma: float
    b: float
    norm: float
    min_on_0b: float
    nonneg_on_01: bool

    @property
    def satisfied(self) -> bool:
        if self.min_on_0b < self.sigma * self.norm:
            return False
        if self.case_id == CASE2:
            return self.nonneg_on_01
        return True


def check_cone(u: GridFunction, case: CaseData) -> ConeReport:
    """Discrete membership test for the cone attached to ``case``."""
    v = u.values
    on_0b = v[u.t <= case.b]
    return ConeReport(
        case_id=case.case_id,
        sigma=case.sigma,
        b=case.b,
        norm=sup_norm(v),
        min_on_0b=float(on_0b.min()),
        nonneg_on_01=bool(np.all(v >= 0.0)),
    )


def seed(spec: ProblemSpec, rho: float, n: int, profile: str = "constant",
         case: Optional[CaseData] = None) -> GridFunction:
    t = np.linspace(0.0, 1.0, n)
    if profile == "constant":
        return GridFunction(np.full(n, float(rho)))
    if profile == "gamma":
        g = np.clip(gamma_line(t, spec), 0.0, None)
        return GridFunction(rho * g / sup_norm(g))
    case = case or classify(spec)
    return GridFunction(np.full(n, rho * case.sigma))


def solve_eigenpair(spec: ProblemSpec, rho: float,
                    opts: SolveOptions = SolveOptions()) -> Eigenpair:
    """Find (lambda, u) with u = lambda T(u) and ||u|| = rho.

    Residuals of the boundary value problem are filled in on return.
    """
    if not rho > 0.0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    T = build_operator(spec, opts.n, opts.rule)
    u = seed(spec, rho, opts.n, opts.seed_profile, classify(spec, opts.b))

    step = np.inf
    for it in range(1, opts.max_iter + 1):
        Tu = T(u, rho)
        norm = sup_norm(Tu)
        if norm < 1e-300:
            raise BreakdownZeroNorm(f"||T(u)|| = {norm!r} at iteration {it}")
        new = rho * Tu.values / norm
        if opts.theta != 1.0:
            new = (1.0 - opts.theta) * u.values + opts.theta * new
            new *= rho / sup_norm(new)
        step = sup_norm(new - u.values)
        u = GridFunction(new)
        if step <= opts.tol * rho:
            break
    else:
        raise NonConvergence(
            f"no convergence after {opts.max_iter} iterations "
            f"(last step {step / rho:.3e} relative)",
            u=u, lam=rho / norm, step=step, iterations=opts.max_iter,
        )

    # normalize exactly and recompute lambda from the returned u
    u = GridFunction(rho * u.values / sup_norm(u))
    lam = rho / sup_norm(T(u, rho))
    ep = Eigenpair(lam=lam, u=u, rho=rho, iterations=it, fp_residual=np.nan)
    report = verify_residuals(ep, spec, opts)
    ep.fp_residual = report.fp
    ep.bc1_residual = report.bc1
    ep.bc2_residual = report.bc2
    ep.ode_residual = report.ode
    ep.ode_residual_full = report.ode_full
    return ep


def verify_residuals(ep: Eigenpair, spec: ProblemSpec,
                     opts: SolveOptions = SolveOptions(),
                     tolerances: Tolerances = Tolerances()) -> ResidualReport:
    """Recompute every residual of the eigenpair from scratch.

    * fixed point: ||u - lambda T(u)|| / rho
    * u'(0) + lambda H1[u]
    * beta D^(alpha-1) u(1) + u(eta) - lambda H2[u]
    * D^alpha u + lambda f(t, u) on the interior window (and on all of (0, 1])
    """
    u, lam, rho = ep.u, ep.lam, ep.rho
    T = build_operator(spec, u.n, opts.rule)
    alpha, eta = spec.alpha, spec.eta
    beta = resolve_beta(spec)

    fp = sup_norm(u.values - lam * T(u, rho).values) / rho

    h1 = eval_functional(spec.h1, u, rho)
    h2 = eval_functional(spec.h2, u, rho)
    bc1 = abs(slope_at_zero(u, alpha) + lam * h1)
    bc2 = abs(beta * caputo_low(u, alpha - 1.0)[-1] + float(u(eta)) - lam * h2)

    t = u.t
    f_vals = eval_expr(spec.f, {"t": t, "u": u.values, "rho": float(rho)})
    ode = np.abs(caputo_high(u, alpha) + lam * f_vals)
    lo, hi = ODE_WINDOW
    window = (t >= lo) & (t <= hi)
    return ResidualReport(
        fp=fp,
        bc1=bc1,
        bc2=bc2,
        ode=float(ode[window].max()),
        ode_full=float(ode[1:].max()),
        tolerances=tolerances,
    )


def eigenpair_from_samples(values, spec: ProblemSpec,
                           opts: SolveOptions = SolveOptions()) -> Eigenpair:
    """Rebuild an eigenpair from stored samples: rho = ||u||, lambda = rho/||T(u)||."""
    u = GridFunction(values)
    rho = sup_norm(u)
    if rho == 0.0:
        raise BreakdownZeroNorm("stored eigenfunction is identically zero")
    T = build_operator(spec, u.n, opts.rule)
    norm = sup_norm(T(u, rho))
    if norm < 1e-300:
        raise BreakdownZeroNorm(f"||T(u)|| = {norm!r}")
    ep = Eigenpair(lam=rho / norm, u=u, rho=rho, iterations=0, fp_residual=np.nan)
    ep.fp_residual = sup_norm(u.values - ep.lam * T(u, rho).values) / rho
    return ep
