"""Grid functions, boundary functionals and the perturbed Hammerstein operator

    T(u)(t) = H1[u] gamma(t) + H2[u] + int_0^1 K(t, s) f(s, u(s)) ds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GridTooSmall, NonNegativityWarning
from .kernelcore import gamma_line
from .quadops import DEFAULT_RULE, QuadratureRule, integrate_grid, kernel_rule
from .specparse import FunctionalSpec, PointEval, ProblemSpec, eval_expr


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on the uniform grid t_k = k/(n-1) over [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 3 or v.size % 2 == 0:
            raise GridTooSmall(f"grid functions need an odd number >= 3 of nodes, got {v.size}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, fn, n: int) -> "GridFunction":
        t = np.linspace(0.0, 1.0, n)
        return cls(np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def __call__(self, s):
        """Piecewise-linear interpolation."""
        return np.interp(s, self.t, self.values)

    def __len__(self):
        return self.n


def sup_norm(u) -> float:
    v = np.asarray(getattr(u, "values", u), dtype=float)
    return float(np.max(np.abs(v))) if v.size else 0.0


def eval_functional(h: FunctionalSpec, u: GridFunction, rho: float) -> float:
    """Evaluate a boundary functional at ``u``.

    Point terms interpolate ``u`` linearly; integral terms use Simpson's rule
    on the grid.  A negative result is returned but flagged with a
    :class:`NonNegativityWarning`.
    """
    total = 0.0
    for term in h.terms:
        coef = eval_expr(term.coef, {"rho": rho})
        if isinstance(term, PointEval):
            total += coef * float(u(term.t0))
        else:
            integrand = eval_expr(
                term.integrand,
                {"s": u.t, "u": u.values, "rho": float(rho)},
            )
            total += coef * integrate_grid(integrand)

    if total < 0.0:
        warnings.warn(
            f"boundary functional {h.to_source()} is negative ({total!r}) at rho={rho!r}",
            NonNegativityWarning,
            stacklevel=2,
        )
    return total


class HammersteinOperator:
    """T discretized on an ``n``-node grid with a fixed quadrature.

    The kernel quadrature is assembled once: the two t-independent parts of
    K share one node set, the ``(t - s)^(alpha-1)`` part gets one row of
    nodes per grid point.  Applying T then needs a single vectorized
    evaluation of f per call, summed in a fixed order.
    """

    def __init__(self, spec: ProblemSpec, n: int, rule: QuadratureRule = DEFAULT_RULE):
        if n < 3 or n % 2 == 0:
            raise GridTooSmall(f"grid needs an odd number >= 3 of nodes, got {n}")
        self.spec = spec
        self.n = n
        self.rule = rule
        self.t = np.linspace(0.0, 1.0, n)
        self.gamma = gamma_line(self.t, spec)

        # t-independent part: beta*int g + int (eta-s)^(a-1) g / Gamma(a)
        nodes0, weights0 = kernel_rule(0.0, spec, rule)
        self.shared_nodes = nodes0
        self.shared_weights = weights0

        # -(t-s)^(a-1)/Gamma(a) part, one row per grid point
        rows = []
        for tk in self.t:
            nodes, weights = kernel_rule(tk, spec, rule)
            rows.append((nodes[nodes0.size:], weights[weights0.size:]))
        width = max(r[0].size for r in rows)
        self.row_nodes = np.zeros((n, width))
        self.row_weights = np.zeros((n, width))
        for k, (nodes, weights) in enumerate(rows):
            self.row_nodes[k, : nodes.size] = nodes
            self.row_weights[k, : weights.size] = weights

    def kernel_integral(self, g) -> np.ndarray:
        """``int_0^1 K(t_k, s) g(s) ds`` at every grid node; ``g`` maps arrays to arrays."""
        shared = np.dot(self.shared_weights, g(self.shared_nodes))
        rows = np.sum(self.row_weights * g(self.row_nodes), axis=1)
        return shared + rows

    def __call__(self, u: GridFunction, rho: float) -> GridFunction:
        if u.n != self.n:
            raise ValueError(f"grid function has {u.n} nodes, operator expects {self.n}")
        spec = self.spec
        rho = float(rho)

        def g(s):
            return eval_expr(spec.f, {"t": s, "u": u(s), "rho": rho})

        h1 = eval_functional(spec.h1, u, rho)
        h2 = eval_functional(spec.h2, u, rho)
        return GridFunction(h1 * self.gamma + h2 + self.kernel_integral(g))


@lru_cache(maxsize=16)
def build_operator(spec: ProblemSpec, n: int, rule: QuadratureRule = DEFAULT_RULE):
    return HammersteinOperator(spec, n, rule)


def apply_T(u: GridFunction, spec: ProblemSpec, rho: float,
            rule: QuadratureRule = DEFAULT_RULE) -> GridFunction:
    """Evaluate T(u) at every node of ``u``'s grid."""
    return build_operator(spec, u.n, rule)(u, rho)
