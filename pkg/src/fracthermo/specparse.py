"""Problem files and the small arithmetic language used inside them.

Expressions support numbers, the variables ``t``, ``u``, ``s`` and ``rho``,
the binary operators ``+ - * / ^``, unary minus, parentheses and the functions
``sin cos exp abs sqrt log``.  ``^`` binds tightest and associates to the
right, unary minus binds tighter than ``*`` and ``/``.

Boundary functionals are sums of ``COEF * u(T0)`` and ``COEF * int(EXPR)``
terms, or the literal ``0``.

A problem file is a list of ``key = value`` lines::

    alpha = 1.8
    eta   = 0.6
    beta  = betaK          # or betaGamma, or a positive number
    f     = t^2 + u^2/(1+rho^2)
    H1    = (1/(1+rho)) * u(0.2)
    H2    = (1/10) * int(u^2)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from .errors import (
    EvalDomainError,
    ExprSyntaxError,
    MissingBinding,
    MissingKey,
    ParseError,
    RangeError,
    UnknownFunction,
    UnknownVariable,
)

F_VARS = frozenset({"t", "u", "rho"})
INTEGRAND_VARS = frozenset({"s", "u", "rho"})
COEF_VARS = frozenset({"rho"})
DELTA_VARS = frozenset({"t", "rho"})
ALL_VARS = frozenset({"t", "u", "s", "rho"})

BETA_TOKENS = ("betaK", "betaGamma")


# {{{ AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]


def variables(e: Expr) -> frozenset:
    """Names of all variables occurring in ``e``."""
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, Call):
        return variables(e.arg)
    return variables(e.left) | variables(e.right)


def to_source(e: Expr) -> str:
    """Print ``e`` fully parenthesized; re-parsing gives back the same tree."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    return f"({to_source(e.left)} {e.op} {to_source(e.right)})"


# }}}

# {{{ evaluation


def _ufunc_sqrt(x):
    if np.any(np.asarray(x) < 0):
        raise EvalDomainError("sqrt of a negative number")
    return np.sqrt(x)


def _ufunc_log(x):
    if np.any(np.asarray(x) <= 0):
        raise EvalDomainError("log of a non-positive number")
    return np.log(x)


FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
    "sqrt": _ufunc_sqrt,
    "log": _ufunc_log,
}


def _eval(e, bindings):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise MissingBinding(e.name) from None
    if isinstance(e, Neg):
        return -_eval(e.operand, bindings)
    if isinstance(e, Call):
        return FUNCTIONS[e.func](_eval(e.arg, bindings))

    a = _eval(e.left, bindings)
    b = _eval(e.right, bindings)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if np.any(np.asarray(b) == 0):
            raise EvalDomainError("division by zero")
        return a / b
    # "^"
    if isinstance(a, float) and isinstance(b, float):
        if a < 0 and not b.is_integer():
            raise EvalDomainError("negative base raised to a fractional power")
        if a == 0 and b < 0:
            raise EvalDomainError("division by zero")
        try:
            return a**b
        except OverflowError:
            raise EvalDomainError("overflow in power") from None
    return np.power(np.asarray(a, dtype=float), b)


def eval_expr(e: Expr, bindings: Mapping[str, object]):
    """Evaluate ``e`` with the given variable bindings.

    Bindings may be floats or numpy arrays (broadcast together).  A float is
    returned when every binding is scalar.  Non-finite results raise
    :class:`EvalDomainError` instead of being returned.
    """
    scalar = all(np.ndim(v) == 0 for v in bindings.values())
    if scalar:
        bindings = {k: float(v) for k, v in bindings.items()}

    with np.errstate(all="ignore"):
        try:
            value = _eval(e, bindings)
        except ZeroDivisionError:
            raise EvalDomainError("division by zero") from None
        except OverflowError:
            raise EvalDomainError("overflow") from None

    if not np.all(np.isfinite(value)):
        raise EvalDomainError(f"non-finite value while evaluating {to_source(e)}")

    if scalar:
        return float(value)
    shape = np.broadcast_shapes(*(np.shape(v) for v in bindings.values()))
    return np.array(np.broadcast_to(value, shape), dtype=float)


# }}}

# {{{ tokenizer + parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
    | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(source: str) -> list:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


@dataclass
class _Parser:
    source: str
    allowed: frozenset
    tokens: list = field(init=False)
    i: int = 0

    def __post_init__(self):
        self.tokens = _tokenize(self.source)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def peek(self, offset=1) -> _Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.tok.pos)
        return self.advance()

    def expect_end(self):
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)

    # expr := term (("+" | "-") term)*
    def expr(self) -> Expr:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    # term := unary (("*" | "/") unary)*
    def term(self) -> Expr:
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    # unary := "-" unary | power
    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    # power := atom ("^" unary)?
    def power(self) -> Expr:
        base = self.atom()
        if self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number {tok.text} out of range", tok.pos)
            return Num(value)

        if tok.kind == "ident":
            self.advance()
            if self.tok.text == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownFunction(tok.text)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text not in self.allowed:
                raise UnknownVariable(tok.text)
            return Var(tok.text)

        if tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node

        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", tok.pos)


def parse_expr(source: str, allowed_vars=ALL_VARS) -> Expr:
    """Parse ``source`` into an expression tree.

    Raises :class:`ExprSyntaxError`, :class:`UnknownVariable` or
    :class:`UnknownFunction`.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)

    p = _Parser(source, frozenset(allowed_vars))
    node = p.expr()
    p.expect_end()
    return node


# }}}

# {{{ functionals


@dataclass(frozen=True)
class PointEval:
    """``coef(rho) * u(t0)``"""

    t0: float
    coef: Expr


@dataclass(frozen=True)
class IntegralTerm:
    """``coef(rho) * int_0^1 integrand(s, u(s), rho) ds``"""

    integrand: Expr
    coef: Expr


@dataclass(frozen=True)
class FunctionalSpec:
    terms: tuple = ()

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def to_source(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for term in self.terms:
            if isinstance(term, PointEval):
                parts.append(f"{to_source(term.coef)} * u({term.t0!r})")
            else:
                parts.append(f"{to_source(term.coef)} * int({to_source(term.integrand)})")
        return " + ".join(parts)


ZERO_FUNCTIONAL = FunctionalSpec(())


def _functional_term(p: _Parser, negate: bool):
    factors = []
    ops = []
    while True:
        tok = p.tok
        if tok.kind == "ident" and tok.text in ("u", "int") and p.peek().text == "(":
            break
        # a coefficient factor; restrict it to rho
        p.allowed = COEF_VARS
        factors.append(p.unary())
        if p.tok.text not in ("*", "/"):
            raise ExprSyntaxError(
                "functional term must end in u(T0) or int(EXPR)", p.tok.pos
            )
        ops.append(p.advance().text)

    if ops and ops[-1] != "*":
        raise ExprSyntaxError("u(T0) / int(EXPR) must be multiplied, not divided", tok.pos)

    coef = factors[0] if factors else Num(1.0)
    for op, factor in zip(ops[:-1], factors[1:]):
        coef = BinOp(op, coef, factor)
    if negate:
        coef = Neg(coef)

    head = p.advance().text
    p.expect("(")
    if head == "u":
        t0_tok = p.tok
        neg = False
        if t0_tok.text == "-":
            p.advance()
            neg = True
            t0_tok = p.tok
        if t0_tok.kind != "num":
            raise ExprSyntaxError("u(...) needs a numeric point", t0_tok.pos)
        p.advance()
        t0 = -float(t0_tok.text) if neg else float(t0_tok.text)
        if not 0.0 <= t0 <= 1.0:
            raise RangeError(f"evaluation point u({t0!r}) outside [0, 1]")
        p.expect(")")
        return PointEval(t0, coef)

    p.allowed = INTEGRAND_VARS
    integrand = p.expr()
    p.expect(")")
    return IntegralTerm(integrand, coef)


def parse_functional(source: str) -> FunctionalSpec:
    """Parse a boundary functional: ``0`` or a sum of ``u(T0)``/``int(EXPR)`` terms."""
    if not source or not source.strip():
        raise ExprSyntaxError("empty functional", 0)

    p = _Parser(source, COEF_VARS)
    if p.tok.kind == "num" and float(p.tok.text) == 0.0 and p.peek().kind == "end":
        return ZERO_FUNCTIONAL

    terms = []
    negate = False
    if p.tok.text == "-":
        p.advance()
        negate = True
    while True:
        terms.append(_functional_term(p, negate))
        if p.tok.text in ("+", "-"):
            negate = p.advance().text == "-"
            continue
        p.expect_end()
        break
    return FunctionalSpec(tuple(terms))


# }}}

# {{{ problem files


@dataclass(frozen=True)
class ProblemSpec:
    """Parameters and nonlinearities of one eigenvalue problem.

    ``beta`` is either a positive float or one of the tokens ``"betaK"`` /
    ``"betaGamma"``, which are resolved to the corresponding threshold by
    :func:`fracthermo.kernelcore.resolve_beta`.
    """

    alpha: float
    eta: float
    beta: Union[float, str]
    f: Expr
    h1: FunctionalSpec = ZERO_FUNCTIONAL
    h2: FunctionalSpec = ZERO_FUNCTIONAL
    b: Optional[float] = None
    delta_lo: Optional[Expr] = None
    delta_hi: Optional[Expr] = None
    eta1_lo: Optional[Expr] = None
    eta1_hi: Optional[Expr] = None
    eta2_lo: Optional[Expr] = None
    eta2_hi: Optional[Expr] = None

    def __post_init__(self):
        for key in ("alpha", "eta", "beta", "b"):
            value = getattr(self, key)
            if key == "b" and value is None:
                continue
            if key == "beta" and isinstance(value, str):
                if value not in BETA_TOKENS:
                    raise RangeError(f"unknown beta token {value!r}")
                continue
            _check_range(key, value)


_REQUIRED = ("alpha", "eta", "beta", "f", "H1", "H2")
_OPTIONAL = ("b", "delta_lo", "delta_hi", "eta1_lo", "eta1_hi", "eta2_lo", "eta2_hi")


def _number(text):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"expected a number, found {text!r}") from None
    if not math.isfinite(value):
        raise RangeError(f"{text!r} is not finite")
    return value


def parse_problem(source: str) -> ProblemSpec:
    """Parse the text of a problem file into a validated :class:`ProblemSpec`.

    Every failure is a :class:`ParseError` (or subclass) carrying the line
    number of the offending entry.
    """
    entries = {}
    lines = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ParseError("expected 'key = value'", lineno)
        key, value = (part.strip() for part in text.split("=", 1))
        if key not in _REQUIRED and key not in _OPTIONAL:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in entries:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ParseError(f"empty value for {key!r}", lineno)
        entries[key] = value
        lines[key] = lineno

    last_line = len(source.splitlines()) or 1
    for key in _REQUIRED:
        if key not in entries:
            raise MissingKey(key, last_line)

    kwargs = {}
    for key, value in entries.items():
        try:
            if key in ("alpha", "eta", "b"):
                kwargs[key] = _number(value)
            elif key == "beta":
                kwargs[key] = value if value in BETA_TOKENS else _number(value)
            elif key == "f":
                kwargs["f"] = parse_expr(value, F_VARS)
            elif key in ("H1", "H2"):
                kwargs[key.lower()] = parse_functional(value)
            elif key.startswith("delta"):
                kwargs[key] = parse_expr(value, DELTA_VARS)
            else:
                kwargs[key] = parse_expr(value, COEF_VARS)
            if key in ("alpha", "eta", "beta", "b"):
                _check_range(key, kwargs[key])
        except ParseError as exc:
            raise exc.with_line(lines[key])

    return ProblemSpec(**kwargs)


def _check_range(key, value):
    if key == "alpha" and not 1.0 < value <= 2.0:
        raise RangeError(f"alpha = {value!r} is outside (1, 2]")
    if key == "eta" and not 0.0 < value < 1.0:
        raise RangeError(f"eta = {value!r} is outside (0, 1)")
    if key == "beta" and not isinstance(value, str) and not value > 0.0:
        raise RangeError(f"beta = {value!r} must be positive")
    if key == "b" and not 0.0 < value < 1.0:
        raise RangeError(f"b = {value!r} is outside (0, 1)")


def load_problem(path) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


# }}}
