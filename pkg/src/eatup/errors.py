"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class EatupError(Exception):
    """Base class for all package errors."""


class ParameterError(EatupError, ValueError):
    """Model parameters or problem settings are out of range."""


class HorizonExceedsPathError(EatupError, ValueError):
    def __init__(self, horizon: int, length: int):
        super().__init__(f"horizon T={horizon} exceeds path length bound N={length}")
        self.horizon = horizon
        self.length = length


class InfeasibleError(EatupError, ValueError):
    """A pair (x, y, t) lies outside the domain of the return function."""

    def __init__(self, t: int, x: float, y: float, what: str = "pair"):
        super().__init__(f"infeasible {what} at t={t}: (x={x!r}, y={y!r})")
        self.t = t
        self.x = x
        self.y = y


class BoundaryInfeasibleError(InfeasibleError):
    def __init__(self, t: int, x: float):
        super().__init__(t, x, 0.0, what="eating-up boundary term")


class StencilError(EatupError, ArithmeticError):
    """A finite-difference stencil point is outside the function's domain."""


class SingularJacobianError(EatupError, ArithmeticError):
    def __init__(self, row: int):
        super().__init__(f"zero pivot in tridiagonal sweep at row {row}")
        self.row = row


class NoConvergenceError(EatupError, ArithmeticError):
    def __init__(self, message: str, residual_norm: float, iterations: int, x=None):
        super().__init__(f"{message} (residual norm {residual_norm:.3e} after {iterations} iterations)")
        self.residual_norm = residual_norm
        self.iterations = iterations
        self.x = x


class WindowError(EatupError, ValueError):
    """A series, path or schedule is too short for the requested window."""


class PathFormatError(EatupError, ValueError):
    """A path CSV file is malformed."""


class AttainabilityError(EatupError, ValueError):
    def __init__(self, index: int, label: str = "path"):
        super().__init__(f"{label} is not attainable: first violation at t={index}")
        self.index = index
        self.label = label


class ExprSyntaxError(EatupError, ValueError):
    def __init__(self, message: str, offset: int, expected: str | None = None):
        hint = f"; expected {expected}" if expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")
        self.offset = offset
        self.expected = expected


class ExprDomainError(EatupError, ArithmeticError):
    """Evaluation left the real domain (ln/sqrt of a nonpositive value, 0 division...)."""

    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in `{subexpr}`")
        self.subexpr = subexpr


class UnboundParameterError(EatupError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unbound parameter {self.name!r}"
