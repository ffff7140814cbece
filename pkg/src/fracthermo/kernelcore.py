"""Green's kernel, the affine boundary profile and their positivity constants.

The kernel of the linear thermostat problem is

    K(t, s) = beta + (eta - s)^(alpha-1)/Gamma(alpha) [s <= eta]
                   - (t - s)^(alpha-1)/Gamma(alpha) [s <= t]

and the profile attached to the flux condition is the decreasing line

    gamma(t) = beta/Gamma(3 - alpha) + eta - t.

Depending on how ``beta`` compares with the thresholds ``beta_K`` and
``beta_gamma`` the problem falls in one of three regimes, each with its own
interval ``[0, b]`` and cone constants; see :func:`classify`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import DomainError, InvalidB
from .specparse import ProblemSpec

CASE1 = "Case1"
CASE2 = "Case2"
CASE3 = "Case3"
MIXED = "Mixed"

#: relative tolerance for treating a numeric beta as equal to a threshold
EQUALITY_TOL = 1e-12

# {{{ gamma function

# Lanczos coefficients, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def gamma_fn(x: float) -> float:
    """Gamma function for positive real arguments (Lanczos approximation)."""
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"gamma_fn is only defined here for x > 0, got {x!r}")

    # the series is accurate for x >= 1/2; shift smaller arguments up once
    if x < 0.5:
        return gamma_fn(x + 1.0) / x

    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (z + i)
    w = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * w ** (z + 0.5) * math.exp(-w) * acc


# }}}

# {{{ parameters


@dataclass(frozen=True)
class Thresholds:
    beta_K: float
    beta_gamma: float
    t_K: float
    t_gamma: float
    t_star: float


@dataclass(frozen=True)
class _Params:
    alpha: float
    eta: float
    beta: float
    gamma_alpha: float
    gamma_3ma: float
    beta_K: float
    beta_gamma: float


@lru_cache(maxsize=256)
def _params(spec: ProblemSpec) -> _Params:
    alpha, eta = spec.alpha, spec.eta
    g_a = gamma_fn(alpha)
    g_3 = gamma_fn(3.0 - alpha)
    beta_K = (1.0 - eta) ** (alpha - 1.0) / g_a
    beta_gamma = (1.0 - eta) * g_3
    if spec.beta == "betaK":
        beta = beta_K
    elif spec.beta == "betaGamma":
        beta = beta_gamma
    else:
        beta = float(spec.beta)
    return _Params(alpha, eta, beta, g_a, g_3, beta_K, beta_gamma)


def resolve_beta(spec: ProblemSpec) -> float:
    """Numeric value of ``beta``, resolving the ``betaK``/``betaGamma`` tokens."""
    return _params(spec).beta


def thresholds(spec: ProblemSpec) -> Thresholds:
    p = _params(spec)
    t_K = p.eta + (p.beta * p.gamma_alpha) ** (1.0 / (p.alpha - 1.0))
    t_gamma = p.eta + p.beta / p.gamma_3ma
    return Thresholds(p.beta_K, p.beta_gamma, t_K, t_gamma, min(t_K, t_gamma))


# }}}

# {{{ kernel and profile


def _pow0(x, p):
    # negative arguments only occur outside the indicator's support
    return np.maximum(x, 0.0) ** p


def kernel_K(t, s, spec: ProblemSpec):
    """Green's kernel K(t, s); broadcasts over array arguments."""
    p = _params(spec)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    a1 = p.alpha - 1.0
    val = (
        p.beta
        + np.where(s <= p.eta, _pow0(p.eta - s, a1), 0.0) / p.gamma_alpha
        - np.where(s <= t, _pow0(t - s, a1), 0.0) / p.gamma_alpha
    )
    return float(val) if val.ndim == 0 else val


def gamma_line(t, spec: ProblemSpec):
    """The affine profile gamma(t) = beta/Gamma(3-alpha) + eta - t."""
    p = _params(spec)
    val = p.beta / p.gamma_3ma + p.eta - np.asarray(t, dtype=float)
    return float(val) if np.ndim(val) == 0 else val


def gamma_sup_norm(spec: ProblemSpec) -> float:
    """sup |gamma| over [0, 1], read off the endpoints."""
    return max(abs(gamma_line(0.0, spec)), abs(gamma_line(1.0, spec)))


# }}}

# {{{ classification


@dataclass(frozen=True)
class CaseData:
    case_id: str
    b: float
    phi_const: float
    c_K: float
    sigma_gamma: float
    sigma: float
    tau: float
    thresholds: Thresholds
    beta: float


def case_of(spec: ProblemSpec) -> str:
    p = _params(spec)
    hi = max(p.beta_K, p.beta_gamma)
    lo = min(p.beta_K, p.beta_gamma)

    if isinstance(spec.beta, str):
        # exact comparison: beta *is* one of the thresholds
        return CASE2 if p.beta == hi else MIXED

    if abs(p.beta - hi) <= EQUALITY_TOL * max(1.0, hi):
        return CASE2
    if p.beta > hi:
        return CASE1
    if p.beta < lo:
        return CASE3
    return MIXED


def _kernel_floor_ok(p: _Params, b: float) -> bool:
    return p.beta * p.gamma_alpha > (b - p.eta) ** (p.alpha - 1.0)


def default_b(spec: ProblemSpec, case_id: Optional[str] = None) -> float:
    """Centered default for the right end of the positivity interval."""
    p = _params(spec)
    case_id = case_id or case_of(spec)
    if case_id == CASE1:
        return 1.0
    if case_id == CASE2:
        return 0.5 * (p.eta + 1.0)

    t_star = thresholds(spec).t_star
    if not t_star > p.eta:
        raise InvalidB(f"no admissible b: t* = {t_star!r} is not above eta = {p.eta!r}")
    b = 0.5 * (p.eta + min(t_star, 1.0))
    while not _kernel_floor_ok(p, b):
        b = p.eta + 0.5 * (b - p.eta)
    return b


def _check_b(spec, case_id, b):
    p = _params(spec)
    if case_id == CASE1:
        if b != 1.0:
            raise InvalidB(f"b must be 1 in {CASE1}, got {b!r}")
        return
    if not p.eta <= b < 1.0:
        raise InvalidB(f"b = {b!r} must satisfy eta <= b < 1 (eta = {p.eta!r})")
    if case_id in (CASE3, MIXED):
        t_star = thresholds(spec).t_star
        if not b < t_star:
            raise InvalidB(f"b = {b!r} must be below t* = {t_star!r}")
        if not _kernel_floor_ok(p, b):
            raise InvalidB(
                f"b = {b!r} violates beta*Gamma(alpha) > (b - eta)^(alpha-1)"
            )


def classify(spec: ProblemSpec, b_override: Optional[float] = None) -> CaseData:
    """Classify ``spec`` and compute the interval and cone constants.

    The interval end ``b`` is taken from ``b_override``, then ``spec.b``, then
    :func:`default_b`.  The mixed regime, where beta lies between the two
    thresholds, reuses the sign-changing constants on ``[0, b]`` with
    ``b < t*``.
    """
    p = _params(spec)
    th = thresholds(spec)
    case_id = case_of(spec)

    if case_id == CASE1:
        b = 1.0 if b_override is None else float(b_override)
    else:
        b = b_override if b_override is not None else spec.b
        b = default_b(spec, case_id) if b is None else float(b)
    _check_b(spec, case_id, b)

    bg = p.beta * p.gamma_alpha
    eta_pow = p.eta ** (p.alpha - 1.0)
    g3 = p.gamma_3ma

    if case_id in (CASE1, CASE2):
        # b = 1 in Case 1 turns the Case 2 formulas into the Case 1 ones
        phi = p.beta + eta_pow / p.gamma_alpha
        c_K = (bg - (b - p.eta) ** (p.alpha - 1.0)) / (bg + eta_pow)
        sigma_gamma = (p.beta + (p.eta - b) * g3) / (p.beta + p.eta * g3)
    else:
        neg_part = (1.0 - p.eta) ** (p.alpha - 1.0) - bg
        phi = max(bg + eta_pow, neg_part) / p.gamma_alpha
        # equals the two-branch minimum whenever K changes sign and stays
        # positive when only gamma does
        c_K = (bg - (b - p.eta) ** (p.alpha - 1.0)) / (p.gamma_alpha * phi)
        sigma_gamma = (p.beta + (p.eta - b) * g3) / max(
            p.beta + p.eta * g3, (1.0 - p.eta) * g3 - p.beta
        )

    sigma = min(sigma_gamma, 1.0, c_K)
    tau = {CASE1: sigma, CASE2: 0.0}.get(case_id, -1.0)
    return CaseData(
        case_id=case_id,
        b=b,
        phi_const=phi,
        c_K=c_K,
        sigma_gamma=sigma_gamma,
        sigma=sigma,
        tau=tau,
        thresholds=th,
        beta=p.beta,
    )


# }}}
