"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`CauchyMeasureError`; the CLI maps the subclasses onto exit codes.
"""


class CauchyMeasureError(Exception):
    pass


class ExprSyntaxError(CauchyMeasureError, ValueError):
    """Malformed density expression.

    ``line`` is 1-based, ``column`` is a 0-based character offset within the
    line (the convention of :mod:`ast`).
    """

    def __init__(self, message, text="", line=1, column=0):
        self.text = text
        self.line = line
        self.column = column
        self.bare_message = message
        super().__init__(f"{message} (line {line}, column {column})")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class LinkError(CauchyMeasureError, ValueError):
    """Unresolved or cyclic ``cauchy_of`` reference."""


class SchemaError(CauchyMeasureError, ValueError):
    """A measure-spec document violates the JSON schema."""


class PreconditionError(CauchyMeasureError, ValueError):
    pass


class PoleError(CauchyMeasureError, ZeroDivisionError):
    """An expression was evaluated at (or numerically on) one of its poles."""


class GuardError(CauchyMeasureError):
    """A point lies closer to a quadrature carrier than the guard distance."""

    def __init__(self, message, component=None, point=None, distance=None, guard=None):
        self.component = component
        self.point = point
        self.distance = distance
        self.guard = guard
        super().__init__(message)


class ConsistencyError(CauchyMeasureError):
    """Two independent evaluations of the same quantity disagree."""


class DivergenceError(PreconditionError):
    """Refusal to build from a function whose H1 norm did not converge."""


class BoundViolation(CauchyMeasureError):
    def __init__(self, message, value=None, bound=None):
        self.value = value
        self.bound = bound
        super().__init__(message)
