"""Exception hierarchy shared across the package.

Two error families matter for the CLI exit codes: ValidationError (bad
input, exit 1) and HypothesisError (a numeric precondition of a formula
fails at runtime, exit 2).
"""


class GeometryError(Exception):
    """Base class for all package errors."""


class ValidationError(GeometryError):
    """Invalid configuration or input data."""


class ChartDomainError(ValidationError):
    """A point lies outside the declared chart domain."""


class ExprSyntaxError(ValidationError):
    """Expression text failed to parse."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExprEvalError(GeometryError):
    """Domain error while evaluating an expression (ln of <=0, ...)."""

    def __init__(self, message, subexpr):
        super().__init__(f"{message} in '{subexpr}'")
        self.subexpr = subexpr


class HypothesisError(GeometryError):
    """A numeric hypothesis of a formula is violated (geodesic point,
    degenerate frame, mu^2 <= 0, ...)."""


class GeodesicPointError(HypothesisError):
    """Curvature below threshold; Frenet frame undefined."""


class DegenerateFrameError(HypothesisError):
    """Frame construction failed (lightlike normal, delta ~ 0, ...)."""
