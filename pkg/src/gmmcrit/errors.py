"""Exception types raised across the package."""


class GMMCritError(Exception):
    """Base class for all package errors."""


class DomainError(GMMCritError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DegenerateEvaluationError(GMMCritError, ArithmeticError):
    """A density term underflowed (or became non-finite) during evaluation."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class BoundaryGradientError(DomainError):
    """Gradient requested at a boundary mixture weight."""


class SizeLimitError(DomainError):
    """Enumeration would exceed the configured size guard."""


class InsufficientDataError(DomainError):
    """Too few observations for the requested operation."""


class EmptyComponentError(GMMCritError, ArithmeticError):
    """A mixture component received (numerically) zero total responsibility."""


class DegenerateComponentError(GMMCritError, ArithmeticError):
    """A component standard deviation collapsed below the floor."""

    def __init__(self, message, sigma=None):
        super().__init__(message)
        self.sigma = sigma


class CertificationError(GMMCritError, ArithmeticError):
    """Newton polishing did not reach the certification threshold."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class RegionExitError(CertificationError):
    """A polishing step left the open parameter domain."""


class NoInteriorRootError(GMMCritError, ArithmeticError):
    """The toy critical equation has no sign change in the search window."""


class PrecisionRangeError(GMMCritError, OverflowError):
    """The exponent range of the working precision is insufficient."""

    def __init__(self, message, threshold=None):
        super().__init__(message)
        self.threshold = threshold


class ConsistencyError(GMMCritError, ArithmeticError):
    """A recovered quantity fell outside its admissible range."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class SampleFormatError(GMMCritError, ValueError):
    """Sample text could not be parsed into finite numbers."""
