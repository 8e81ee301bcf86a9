"""Exception hierarchy.

Everything raised on bad input derives from :class:`ValidationError`, which
the command line maps to exit code 2.  :class:`ConsistencyError` signals a
broken internal invariant and maps to exit code 1.
"""


class QCWalkError(Exception):
    pass


class ValidationError(QCWalkError, ValueError):
    """Input rejected.  ``report`` carries a structured diagnosis when available."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DimensionError(ValidationError):
    pass


class SymmetryError(ValidationError):
    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class SpecificationError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class PositivityError(ValidationError):
    pass


class GaugePreconditionError(ValidationError):
    pass


class CommensurabilityError(ValidationError):
    def __init__(self, message, smallest_size=None):
        super().__init__(message)
        self.smallest_size = smallest_size


class InsufficientDataError(ValidationError):
    pass


class DegenerateExtractionError(ValidationError):
    pass


class EvaluationError(ValidationError):
    pass


class ConsistencyError(QCWalkError, RuntimeError):
    """An invariant that should hold by construction did not."""
