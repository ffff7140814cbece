"""Exception and warning types shared across the package."""


class FracThermoError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FracThermoError):
    """Malformed problem file or expression.

    ``line`` is the 1-based line of the problem file when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)

    def with_line(self, line):
        """Tag the error with a problem-file line number (in place) and return it."""
        self.line = line
        self.args = (f"line {line}: {self.message}",)
        return self


class ExprSyntaxError(ParseError):
    def __init__(self, message, pos=None, line=None):
        self.pos = pos
        if pos is not None and "at position" not in message:
            message = f"{message} at position {pos}"
        super().__init__(message, line)


class UnknownVariable(ParseError):
    def __init__(self, name, line=None):
        self.name = name
        super().__init__(f"unknown variable {name!r}", line)


class UnknownFunction(ParseError):
    def __init__(self, name, line=None):
        self.name = name
        super().__init__(f"unknown function {name!r}", line)


class MissingKey(ParseError):
    def __init__(self, key, line=None):
        self.key = key
        super().__init__(f"missing key {key!r}", line)


class RangeError(ParseError):
    pass


class EvalDomainError(FracThermoError, ArithmeticError):
    """Division by zero, log/sqrt outside their domain, or a non-finite result."""


class MissingBinding(FracThermoError, KeyError):
    def __str__(self):
        return f"no value bound for variable {self.args[0]!r}"


class DomainError(FracThermoError, ValueError):
    pass


class InvalidB(FracThermoError, ValueError):
    pass


class GridTooSmall(FracThermoError, ValueError):
    pass


class NonConvergence(FracThermoError):
    """The normalized fixed-point iteration did not reach its tolerance.

    The last iterate, eigenvalue estimate and step size are kept for inspection.
    """

    def __init__(self, message, u=None, lam=None, step=None, iterations=None):
        super().__init__(message)
        self.u = u
        self.lam = lam
        self.step = step
        self.iterations = iterations


class BreakdownZeroNorm(FracThermoError):
    pass


class HypothesisFail(FracThermoError):
    pass


class InconsistentOverride(FracThermoError, ValueError):
    pass


class NonNegativityWarning(UserWarning):
    """A boundary functional evaluated to a negative number."""
