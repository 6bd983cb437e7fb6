"""Exception types raised across the package."""


class LacunaError(Exception):
    """Base class for every error raised by lacuna."""


class DimensionTooLarge(LacunaError):
    pass


class PatternMismatch(LacunaError):
    pass


class UnsupportedKind(LacunaError):
    pass


class SizeExceeded(LacunaError):
    pass


class ZeroPolynomial(LacunaError):
    pass


class ZeroVector(LacunaError):
    pass


class TooManyIndices(LacunaError):
    pass


class WeightTooLarge(LacunaError):
    pass


class BoundViolated(LacunaError):
    pass


class ConditionFailed(LacunaError):
    pass


class IrrationalData(LacunaError):
    pass


class HorizonExhausted(LacunaError):
    """Fewer indices than requested passed the acceptance test."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class NotFound(LacunaError):
    """Search budget ran out; ``best`` holds the best unverified candidate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class Unbounded(LacunaError):
    """No constant in the search bracket satisfies the comparison."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
