"""Quadrature against the Green's kernel and grid-based Caputo derivatives.

The kernel is continuous but only piecewise smooth in ``s``: the two power
terms ``(eta - s)^(alpha-1)`` and ``(t - s)^(alpha-1)`` have unbounded
derivatives at ``s = eta`` and ``s = t``.  :func:`kernel_rule` therefore
integrates each term of K over its own support, with composite Gauss-Legendre
panels and a Gauss-Jacobi panel carrying the power weight next to the
singular end.  For smooth ``g`` this is accurate to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import GridTooSmall
from .kernelcore import _params, gamma_fn
from .specparse import ProblemSpec


@dataclass(frozen=True)
class QuadratureRule:
    panels: int = 32
    nodes_per_panel: int = 8
    split_points: tuple = ()

    def __post_init__(self):
        if self.panels < 1 or self.nodes_per_panel < 1:
            raise ValueError("panels and nodes_per_panel must be positive")
        pts = tuple(float(p) for p in self.split_points)
        if any(not 0.0 < p < 1.0 for p in pts):
            raise ValueError("split points must lie in (0, 1)")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("split points must be strictly increasing")
        object.__setattr__(self, "split_points", pts)


DEFAULT_RULE = QuadratureRule()


@lru_cache(maxsize=None)
def _gauss_legendre(m):
    return leggauss(m)


@lru_cache(maxsize=None)
def _gauss_jacobi(m, p):
    # weight (1 - x)^p on [-1, 1]
    x, w = roots_jacobi(m, p, 0.0)
    return np.asarray(x), np.asarray(w)


def _breakpoints(a, c, rule):
    inner = [p for p in rule.split_points if a < p < c]
    return [a, *inner, c]


def plain_rule(a: float, c: float, rule: QuadratureRule = DEFAULT_RULE):
    """Composite Gauss-Legendre nodes and weights on ``[a, c]``."""
    if c <= a:
        return np.empty(0), np.empty(0)
    x, w = _gauss_legendre(rule.nodes_per_panel)
    nodes, weights = [], []
    bps = _breakpoints(a, c, rule)
    for lo, hi in zip(bps[:-1], bps[1:]):
        edges = np.linspace(lo, hi, rule.panels + 1)
        half = 0.5 * np.diff(edges)
        nodes.append((edges[:-1, None] + half[:, None] * (x + 1.0)).ravel())
        weights.append((half[:, None] * w).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def singular_rule(c: float, p: float, upper: float, rule: QuadratureRule = DEFAULT_RULE):
    """Nodes and weights for ``int_0^min(c, upper) (c - s)^p g(s) ds``.

    When the interval reaches ``c`` the last panel uses Gauss-Jacobi with the
    power weight built in; elsewhere the weight is sampled at Gauss-Legendre
    nodes, where it is smooth.
    """
    end = min(c, upper)
    if end <= 0.0:
        return np.empty(0), np.empty(0)

    x, w = _gauss_legendre(rule.nodes_per_panel)
    xj, wj = _gauss_jacobi(rule.nodes_per_panel, p)
    nodes, weights = [], []
    bps = _breakpoints(0.0, end, rule)
    for k, (lo, hi) in enumerate(zip(bps[:-1], bps[1:])):
        edges = np.linspace(lo, hi, rule.panels + 1)
        half = 0.5 * np.diff(edges)
        s = edges[:-1, None] + half[:, None] * (x + 1.0)
        wts = half[:, None] * w * (c - s) ** p
        if end == c and k == len(bps) - 2:
            h = half[-1]
            s[-1] = edges[-2] + h * (xj + 1.0)
            wts[-1] = wj * h ** (p + 1.0)
        nodes.append(s.ravel())
        weights.append(wts.ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def kernel_rule(t: float, spec: ProblemSpec, rule: QuadratureRule = DEFAULT_RULE,
                upper: float = 1.0):
    """Nodes and weights with ``sum(w * g(nodes)) ~ int_0^upper K(t, s) g(s) ds``."""
    p = _params(spec)
    a1 = p.alpha - 1.0

    n_const, w_const = plain_rule(0.0, upper, rule)
    n_eta, w_eta = singular_rule(p.eta, a1, upper, rule)
    n_t, w_t = singular_rule(float(t), a1, upper, rule)

    nodes = np.concatenate([n_const, n_eta, n_t])
    weights = np.concatenate(
        [p.beta * w_const, w_eta / p.gamma_alpha, -w_t / p.gamma_alpha]
    )
    return nodes, weights


def integrate_against_kernel(t: float, g, spec: ProblemSpec,
                             rule: QuadratureRule = DEFAULT_RULE,
                             upper: float = 1.0) -> float:
    """Approximate ``int_0^upper K(t, s) g(s) ds``.

    ``g`` is called once with an array of nodes and must return an array
    (or a scalar, which is broadcast).
    """
    nodes, weights = kernel_rule(t, spec, rule, upper)
    values = np.broadcast_to(np.asarray(g(nodes), dtype=float), nodes.shape)
    return float(np.dot(weights, values))


def integrate(g, a: float = 0.0, c: float = 1.0,
              rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Composite Gauss-Legendre integral of a smooth ``g`` over ``[a, c]``."""
    nodes, weights = plain_rule(a, c, rule)
    values = np.broadcast_to(np.asarray(g(nodes), dtype=float), nodes.shape)
    return float(np.dot(weights, values))


# {{{ grid operations


def _values(u):
    return np.asarray(getattr(u, "values", u), dtype=float)


def integrate_grid(u) -> float:
    """Composite Simpson rule on a uniform grid over [0, 1] (odd node count)."""
    v = _values(u)
    n = v.size
    if n < 3 or n % 2 == 0:
        raise GridTooSmall(f"Simpson's rule needs an odd number >= 3 of nodes, got {n}")
    h = 1.0 / (n - 1)
    return float(h / 3.0 * (v[0] + v[-1] + 4.0 * v[1:-1:2].sum() + 2.0 * v[2:-1:2].sum()))


def _history_weights(n, p):
    # (m + 1)^p - m^p for m = 0..n-2, with 0^0 taken as 0
    m = np.arange(n - 1, dtype=float)
    if p == 0.0:
        out = np.zeros(n - 1)
        out[0] = 1.0
        return out
    return (m + 1.0) ** p - m**p


def _causal_sum(d, weights):
    # out[k] = sum_{j<k} d[j] * weights[k-1-j]
    n = d.size + 1
    out = np.zeros(n)
    out[1:] = np.convolve(d, weights)[: n - 1]
    return out


def caputo_low(u, mu: float):
    """L1 approximation of the Caputo derivative of order ``mu`` in (0, 1].

    Returns an array of nodal values (0 at t = 0).  ``u`` is a grid function
    or an array of samples on the uniform grid over [0, 1].
    """
    v = _values(u)
    n = v.size
    if n < 3:
        raise GridTooSmall(f"caputo_low needs at least 2 intervals, got {n - 1}")
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"order mu = {mu!r} outside (0, 1]")
    h = 1.0 / (n - 1)
    p = 1.0 - mu
    slopes = np.diff(v) / h
    return _causal_sum(slopes, _history_weights(n, p)) * h**p / gamma_fn(2.0 - mu)


def second_differences(v):
    """Second derivative at every node: centered inside, one-sided (4 points) at the ends."""
    v = np.asarray(v, dtype=float)
    h = 1.0 / (v.size - 1)
    d2 = np.empty_like(v)
    d2[1:-1] = v[:-2] - 2.0 * v[1:-1] + v[2:]
    d2[0] = 2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]
    d2[-1] = 2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]
    return d2 / h**2


def caputo_high(u, alpha: float):
    """Caputo derivative of order ``alpha`` in (1, 2] on the grid.

    The second derivative is replaced by second differences, held constant
    on each interval, and integrated exactly against ``(t_k - s)^(1-alpha)``.
    For ``alpha = 2`` the nodal second differences are returned.
    """
    v = _values(u)
    n = v.size
    if n < 5:
        raise GridTooSmall(f"caputo_high needs at least 4 intervals, got {n - 1}")
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"order alpha = {alpha!r} outside (1, 2]")
    d2 = second_differences(v)
    if alpha == 2.0:
        return d2
    h = 1.0 / (n - 1)
    p = 2.0 - alpha
    return _causal_sum(d2[:-1], _history_weights(n, p)) * h**p / gamma_fn(3.0 - alpha)


@lru_cache(maxsize=64)
def _slope_stencil(alpha, h):
    powers = (0.0, 1.0, alpha, alpha + 1.0)
    pts = np.arange(4) * h
    A = np.array([pts**q if q else np.ones(4) for q in powers])
    return np.linalg.solve(A, np.array([0.0, 1.0, 0.0, 0.0]))


def slope_at_zero(u, alpha: float) -> float:
    """One-sided estimate of u'(0) from the first four nodes.

    Near t = 0 solutions behave like ``a + b t + c t^alpha + d t^(alpha+1)``,
    so the stencil is made exact on those four functions; an ordinary
    polynomial stencil only reaches O(h^(alpha-1)) there.  At ``alpha = 2``
    it is the standard four-point formula.
    """
    v = _values(u)
    if v.size < 4:
        raise GridTooSmall("slope_at_zero needs at least 4 nodes")
    h = 1.0 / (v.size - 1)
    return float(np.dot(_slope_stencil(float(alpha), h), v[:4]))


# }}}
