"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all mindiv-specific errors."""


class DomainError(ToolkitError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvalidInputError(ToolkitError, ValueError):
    """Structurally invalid input: empty sample, bad mixing weight, ..."""


class IntegrationError(ToolkitError, ArithmeticError):
    """An integrand produced a non-finite value at a node."""

    def __init__(self, message: str, node: float | None = None):
        super().__init__(message)
        self.node = node


class SampleParseError(ToolkitError, ValueError):
    """A sample file contained an unparsable line."""

    def __init__(self, message: str, line_number: int):
        super().__init__(message)
        self.line_number = line_number


class SingularMatrixError(ToolkitError, ArithmeticError):
    """A sensitivity matrix is singular; carries the offending matrix."""

    def __init__(self, message: str, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class DegenerateDataError(ToolkitError, ValueError):
    """The sample admits no nondegenerate estimate (e.g. zero spread)."""


class EvaluationError(ToolkitError, ArithmeticError):
    """An objective returned NaN inside its feasible region."""


class EstimationError(ToolkitError, RuntimeError):
    """An estimation run failed; carries context about the failing measure."""
