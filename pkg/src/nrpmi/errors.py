"""Exception types shared across the codebook modules."""


class CodebookError(ValueError):
    """Base class for all codebook-related errors."""


class DomainError(CodebookError):
    """An index or parameter is outside its permitted range."""


class RestrictionError(CodebookError):
    """A PMI violates a configured beam/rank/amplitude restriction."""


class DegenerateReportError(CodebookError):
    """A report carries no usable signal (e.g. all-zero amplitudes)."""


class ConsistencyError(CodebookError):
    """Fields of a report contradict each other (e.g. bitmap vs coefficients)."""


class BudgetError(CodebookError):
    """A report exceeds its nonzero-coefficient budget."""


class FormatError(CodebookError):
    """A serialized record or index field cannot be decoded."""


class SingularityError(CodebookError):
    """A matrix required to be invertible is singular."""


class FeasibilityError(CodebookError):
    """The requested beamforming/allocation problem has no solution."""
