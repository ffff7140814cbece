"""Sector bounds and the eigenvalue localization interval [L(rho), U(rho)].

For an eigenpair with ||u|| = rho the eigenvalue is squeezed between

    L = rho / (eta1_hi ||gamma|| + eta2_hi + int_0^1 Phi delta_hi)
    U = rho / (eta1_lo gamma(0) + eta2_lo + int_0^b K(0, s) delta_lo(s) ds)

where the ``delta``/``eta`` quantities bound f and the boundary functionals
over the sector the eigenfunction lives in.  Bounds come from the problem
file when given there, and are otherwise sampled on a grid of u values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .eigensolver import SolveOptions, check_cone, solve_eigenpair
from .errors import FracThermoError, HypothesisFail, InconsistentOverride, NonConvergence
from .kernelcore import CASE3, CaseData, classify, gamma_line, gamma_sup_norm
from .quadops import DEFAULT_RULE, QuadratureRule, integrate, integrate_against_kernel
from .specparse import FunctionalSpec, PointEval, ProblemSpec, eval_expr

#: number of u samples across a sector
U_SAMPLES = 257
#: number of t samples used to cross-check user-supplied delta bounds
T_SAMPLES = 129
#: relative slack of the sandwich check L <= lambda <= U
SANDWICH_RTOL = 1e-9

USER = "user-supplied"
AUTO = "auto-sampled"


@dataclass(frozen=True)
class SectorBounds:
    delta_lo: Callable
    delta_hi: Callable
    eta1_lo: float
    eta1_hi: float
    eta2_lo: float
    eta2_hi: float
    provenance: dict = field(default_factory=dict)


def _u_grid(lo, hi):
    return np.linspace(lo, hi, U_SAMPLES)


def _f_table(spec, t, u, rho):
    # f on the product grid, shape (len(t), len(u))
    tt, uu = np.meshgrid(np.asarray(t, dtype=float), u, indexing="ij")
    return eval_expr(spec.f, {"t": tt, "u": uu, "rho": rho})


def _sampled_delta(spec, rho, u, reduce):
    def delta(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        vals = np.maximum(reduce(_f_table(spec, t_arr, u, rho), axis=1), 0.0)
        return float(vals[0]) if np.ndim(t) == 0 else vals.reshape(np.shape(t))

    return delta


def _user_delta(expr, rho):
    def delta(t):
        t_arr = np.asarray(t, dtype=float)
        vals = eval_expr(expr, {"t": t_arr, "rho": rho})
        return float(vals) if np.ndim(t) == 0 else np.asarray(vals, dtype=float)

    return delta


def _functional_extreme(h: FunctionalSpec, rho, u, upper: bool, rule) -> float:
    """Term-wise max (or min) of ``h`` over functions with values in ``u``'s range."""
    pick = np.max if upper else np.min
    total = 0.0
    for term in h.terms:
        c = eval_expr(term.coef, {"rho": rho})
        if isinstance(term, PointEval):
            total += pick(c * np.array([u[0], u[-1]]))
            continue
        # the extreme of c*integrand over u, integrated in s
        reduce = pick if c >= 0 else (np.min if upper else np.max)

        def g(s, term=term, reduce=reduce):
            ss, uu = np.meshgrid(s, u, indexing="ij")
            vals = eval_expr(term.integrand, {"s": ss, "u": uu, "rho": rho})
            return reduce(vals, axis=1)

        total += c * integrate(g, 0.0, 1.0, rule)
    return float(total)


def _scalar_override(expr, rho):
    return float(eval_expr(expr, {"rho": rho}))


def sector_bounds(spec: ProblemSpec, rho: float, case: Optional[CaseData] = None,
                  sharpen: bool = False,
                  rule: QuadratureRule = DEFAULT_RULE) -> SectorBounds:
    """Bounds on f and on H1, H2 for eigenfunctions of norm ``rho``.

    ``delta_lo`` bounds f from below over ``[0, b] x [sigma rho, rho]``,
    ``delta_hi`` from above over ``[0, 1] x [tau rho, rho]``.  With
    ``sharpen`` the functional lower bounds use the cone floor instead of 0
    when every point evaluation sits inside ``[0, b]`` (never in Case 3).
    """
    rho = float(rho)
    case = case or classify(spec)
    u_lo = _u_grid(case.sigma * rho, rho)
    u_hi = _u_grid(case.tau * rho, rho)
    prov = {}

    if spec.delta_lo is not None:
        delta_lo = _user_delta(spec.delta_lo, rho)
        prov["delta_lo"] = USER
        t = np.linspace(0.0, case.b, T_SAMPLES)
        f_min = _f_table(spec, t, u_lo, rho).min(axis=1)
        bad = delta_lo(t) > f_min + 1e-12 * np.maximum(1.0, np.abs(f_min))
        if np.any(bad):
            t_bad = float(t[np.argmax(bad)])
            raise InconsistentOverride(
                f"delta_lo exceeds f at t = {t_bad!r} for rho = {rho!r}"
            )
    else:
        delta_lo = _sampled_delta(spec, rho, u_lo, np.min)
        prov["delta_lo"] = AUTO

    if spec.delta_hi is not None:
        delta_hi = _user_delta(spec.delta_hi, rho)
        prov["delta_hi"] = USER
        t = np.linspace(0.0, 1.0, T_SAMPLES)
        f_max = _f_table(spec, t, u_hi, rho).max(axis=1)
        bad = delta_hi(t) < f_max - 1e-12 * np.maximum(1.0, np.abs(f_max))
        if np.any(bad):
            t_bad = float(t[np.argmax(bad)])
            raise InconsistentOverride(
                f"delta_hi is below f at t = {t_bad!r} for rho = {rho!r}"
            )
    else:
        delta_hi = _sampled_delta(spec, rho, u_hi, np.max)
        prov["delta_hi"] = AUTO

    can_sharpen = (
        sharpen
        and case.case_id != CASE3
        and all(
            term.t0 <= case.b
            for h in (spec.h1, spec.h2)
            for term in h.terms
            if isinstance(term, PointEval)
        )
    )

    etas = {}
    for i, h in ((1, spec.h1), (2, spec.h2)):
        hi_key, lo_key = f"eta{i}_hi", f"eta{i}_lo"
        hi_expr, lo_expr = getattr(spec, hi_key), getattr(spec, lo_key)
        if hi_expr is not None:
            etas[hi_key] = _scalar_override(hi_expr, rho)
            prov[hi_key] = USER
        else:
            etas[hi_key] = max(_functional_extreme(h, rho, u_hi, True, rule), 0.0)
            prov[hi_key] = AUTO
        if lo_expr is not None:
            etas[lo_key] = _scalar_override(lo_expr, rho)
            prov[lo_key] = USER
        elif can_sharpen:
            # point values sit in [0, b] where u >= sigma rho; integrals
            # only know the wider sector
            lo = sum(
                _functional_extreme(FunctionalSpec((term,)), rho,
                                    u_lo if isinstance(term, PointEval) else u_hi,
                                    False, rule)
                for term in h.terms
            )
            etas[lo_key] = max(lo, 0.0)
            prov[lo_key] = AUTO
        else:
            etas[lo_key] = 0.0
            prov[lo_key] = AUTO

        if etas[lo_key] < 0.0 or etas[hi_key] < 0.0:
            raise InconsistentOverride(f"eta{i} bounds must be non-negative at rho = {rho!r}")
        if etas[lo_key] > etas[hi_key]:
            raise InconsistentOverride(
                f"eta{i}_lo = {etas[lo_key]!r} exceeds eta{i}_hi = {etas[hi_key]!r}"
                f" at rho = {rho!r}"
            )

    return SectorBounds(delta_lo=delta_lo, delta_hi=delta_hi, provenance=prov, **etas)


def localization_interval(spec: ProblemSpec, rho: float, case: CaseData,
                          sb: SectorBounds,
                          rule: QuadratureRule = DEFAULT_RULE) -> tuple:
    """``(L, U)`` from given sector bounds; U is ``inf`` when its denominator is not positive."""
    rho = float(rho)
    den_L = (
        sb.eta1_hi * gamma_sup_norm(spec)
        + sb.eta2_hi
        + case.phi_const * integrate(sb.delta_hi, 0.0, 1.0, rule)
    )
    den_U = (
        sb.eta1_lo * gamma_line(0.0, spec)
        + sb.eta2_lo
        + integrate_against_kernel(0.0, sb.delta_lo, spec, rule, upper=case.b)
    )
    L = rho / den_L if den_L > 0.0 else math.inf
    U = rho / den_U if den_U > 0.0 else math.inf
    return L, U


@dataclass
class BoundsRow:
    rho: float
    L: float
    U: float
    lam: Optional[float] = None
    converged: Optional[bool] = None
    cone_ok: Optional[bool] = None
    in_interval: Optional[bool] = None
    flags: tuple = ()


def compute_L_U(spec: ProblemSpec, rho: float, b_override: Optional[float] = None,
                strict: bool = True, sharpen: bool = False,
                rule: QuadratureRule = DEFAULT_RULE) -> BoundsRow:
    """Localization interval at ``rho``.

    When the denominator of U is not positive the localization hypothesis
    fails: with ``strict`` this raises :class:`HypothesisFail`, otherwise the
    row carries ``U = inf`` and the flag ``"HypothesisFail"``.
    """
    case = classify(spec, b_override)
    sb = sector_bounds(spec, rho, case, sharpen=sharpen, rule=rule)
    L, U = localization_interval(spec, rho, case, sb, rule)
    flags = []
    if math.isinf(U):
        if strict:
            raise HypothesisFail(
                f"lower bounds vanish at rho = {rho!r}: "
                "eta1_lo gamma(0) + eta2_lo + int K(0,s) delta_lo(s) ds is not positive"
            )
        flags.append("HypothesisFail")
    elif L > U:
        flags.append("InconsistentBounds")
    return BoundsRow(rho=float(rho), L=L, U=U, flags=tuple(flags))


def _sweep_row(spec, rho, solve, opts, sharpen):
    try:
        row = compute_L_U(spec, rho, b_override=opts.b, strict=False,
                          sharpen=sharpen, rule=opts.rule)
    except FracThermoError as exc:
        return BoundsRow(rho=float(rho), L=math.nan, U=math.nan,
                         flags=(type(exc).__name__,))
    if not solve:
        return row

    flags = list(row.flags)
    try:
        ep = solve_eigenpair(spec, rho, opts)
    except NonConvergence:
        row.converged = False
        flags.append("NonConvergence")
    except FracThermoError as exc:
        row.converged = False
        flags.append(type(exc).__name__)
    else:
        row.lam = ep.lam
        row.converged = True
        row.cone_ok = check_cone(ep.u, classify(spec, opts.b)).satisfied
        row.in_interval = bool(
            row.L * (1.0 - SANDWICH_RTOL) <= ep.lam <= row.U * (1.0 + SANDWICH_RTOL)
        )
    row.flags = tuple(flags)
    return row


def sweep(spec: ProblemSpec, rho_values: Sequence[float], solve: bool = False,
          opts: SolveOptions = SolveOptions(), jobs: int = 1,
          sharpen: bool = False) -> list:
    """One :class:`BoundsRow` per rho, in input order.

    Errors are recorded in the row flags; the sweep itself never aborts.
    Rows are independent, so ``jobs > 1`` evaluates them on a thread pool
    without changing the result.
    """
    rhos = [float(r) for r in rho_values]
    if not rhos:
        raise ValueError("rho_values must not be empty")
    if any(not r > 0.0 for r in rhos):
        raise ValueError("rho values must be positive")

    def work(r):
        return _sweep_row(spec, r, solve, opts, sharpen)

    if jobs <= 1:
        return [work(r) for r in rhos]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, rhos))


# {{{ output


CSV_HEADER = "rho,L,U,lambda,converged,cone_ok,in_interval"


def fmt_float(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _fmt_bool(b) -> str:
    return "" if b is None else ("true" if b else "false")


def csv_text(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            fmt_float(r.rho), fmt_float(r.L), fmt_float(r.U), fmt_float(r.lam),
            _fmt_bool(r.converged), _fmt_bool(r.cone_ok), _fmt_bool(r.in_interval),
        ]))
    return "\n".join(lines) + "\n"


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def emit_csv(rows, path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    _write(path, csv_text(rows))


WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=80, right=30, top=30, bottom=60)


def _ticks(lo, hi, count=5):
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def svg_text(rows) -> str:
    rows = [r for r in rows if math.isfinite(r.L)]
    if not rows:
        raise ValueError("no rows with a finite lower bound to plot")
    rows = sorted(rows, key=lambda r: r.rho)
    x0, y0 = MARGIN["left"], MARGIN["top"]
    x1, y1 = WIDTH - MARGIN["right"], HEIGHT - MARGIN["bottom"]

    rho_lo, rho_hi = rows[0].rho, rows[-1].rho
    if rho_hi == rho_lo:
        rho_lo, rho_hi = 0.5 * rho_lo, 1.5 * rho_hi
    finite = [v for r in rows for v in (r.L, r.U, r.lam)
              if v is not None and math.isfinite(v)]
    lam_hi = 1.1 * max(finite)

    def X(rho):
        return x0 + (rho - rho_lo) / (rho_hi - rho_lo) * (x1 - x0)

    def Y(lam):
        if not math.isfinite(lam):
            return y0
        return y1 - min(lam, lam_hi) / lam_hi * (y1 - y0)

    def pt(x, y):
        return f"{x:.2f},{y:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        "<defs>",
        '<pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
        'patternTransform="rotate(45)">',
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#1f4e9c" stroke-width="2"/>',
        "</pattern>",
        "</defs>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]

    # band between L and U
    if len(rows) == 1:
        r = rows[0]
        out.append(
            f'<line x1="{X(r.rho):.2f}" y1="{Y(r.L):.2f}" x2="{X(r.rho):.2f}" '
            f'y2="{Y(r.U):.2f}" stroke="#1f4e9c" stroke-opacity="0.3" stroke-width="6"/>'
        )
    else:
        upper = [pt(X(r.rho), Y(r.U)) for r in rows]
        lower = [pt(X(r.rho), Y(r.L)) for r in reversed(rows)]
        out.append(
            f'<polygon points="{" ".join(upper + lower)}" fill="#1f4e9c" '
            'fill-opacity="0.3" stroke="none"/>'
        )
    for r in rows:
        if math.isinf(r.U):
            out.append(
                f'<rect x="{X(r.rho) - 6:.2f}" y="{y0:.2f}" width="12" height="12" '
                'fill="url(#hatch)" stroke="#1f4e9c"/>'
            )

    # axes
    out.append(
        f'<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black"/>'
    )
    for v in _ticks(rho_lo, rho_hi):
        out.append(
            f'<line x1="{X(v):.2f}" y1="{y1}" x2="{X(v):.2f}" y2="{y1 + 5}" stroke="black"/>'
            f'<text x="{X(v):.2f}" y="{y1 + 20}" font-size="12" '
            f'text-anchor="middle">{v:.3g}</text>'
        )
    for v in _ticks(0.0, lam_hi):
        out.append(
            f'<line x1="{x0 - 5}" y1="{Y(v):.2f}" x2="{x0}" y2="{Y(v):.2f}" stroke="black"/>'
            f'<text x="{x0 - 8}" y="{Y(v) + 4:.2f}" font-size="12" '
            f'text-anchor="end">{v:.3g}</text>'
        )
    out.append(
        f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 15}" font-size="14" '
        'text-anchor="middle">rho</text>'
    )
    out.append(
        f'<text x="20" y="{(y0 + y1) / 2:.2f}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 20 {(y0 + y1) / 2:.2f})">lambda</text>'
    )

    for r in rows:
        if r.lam is not None:
            out.append(
                f'<circle cx="{X(r.rho):.2f}" cy="{Y(r.lam):.2f}" r="3" fill="#c0392b"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(rows, path) -> None:
    if not rows:
        raise ValueError("no rows to plot")
    _write(path, svg_text(rows))


# }}}
