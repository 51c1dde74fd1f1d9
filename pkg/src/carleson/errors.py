"""Exception hierarchy shared by the engine and the command line."""


class CarlesonError(Exception):
    """Base class for every error raised by this package."""


class InvalidInstanceError(CarlesonError):
    """Raised when (Gamma, v, mu) violates a structural requirement."""


class PointOnGammaError(InvalidInstanceError):
    """Raised when a point that must avoid Gamma coincides with a node."""

    def __init__(self, point, index):
        super().__init__(f"point {point!r} coincides with gamma_{index}")
        self.point = point
        self.index = index


class EmptyRangeError(CarlesonError):
    """Raised when a test function would be a sum over no indices."""


class SourceError(CarlesonError):
    """Error carrying a 1-based (line, column) location in instance text."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self.located())

    def located(self):
        if self.line is None:
            return self.message
        return f"{self.line}:{self.column}: {self.message}"


class ParseError(SourceError):
    """Malformed instance text."""


class EvaluationError(SourceError):
    """Arithmetic failure while evaluating an expression (e.g. 1/0)."""
