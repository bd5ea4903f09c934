"""Exception types shared across the package."""


class PqnError(Exception):
    """Base class for all errors raised by this package."""


class ChartMismatchError(PqnError):
    """Objects living on different charts (or a point of the wrong dimension) were combined."""


class UnsupportedExpressionError(PqnError):
    """An expression left the supported node set (e.g. a non-affine exp argument)."""


class EvaluationOverflowError(PqnError):
    """Evaluation produced a non-finite value; ``node`` names the offending subtree."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class DegenerateDomainError(PqnError):
    """The sampling box is incompatible with the separation guard (resampling budget exhausted)."""


class DegreeError(PqnError):
    """A form of unsuitable degree was passed to a graded operation."""


class HypothesisViolationError(PqnError):
    """A deformation hypothesis failed; carries a witness point when one exists."""

    def __init__(self, message, witness=None, residual=None):
        super().__init__(message)
        self.witness = witness
        self.residual = residual


class ConfigError(PqnError):
    """A run configuration could not be parsed or validated."""
