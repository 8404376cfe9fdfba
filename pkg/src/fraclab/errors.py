"""Exception types shared across fraclab."""


class FraclabError(Exception):
    """Base class for all library errors."""


class DomainError(FraclabError, ValueError):
    """An input lies outside the domain of an operation."""


class ResourceError(FraclabError):
    """An enumeration or memory budget was exceeded.

    ``partial`` carries whatever was computed before the budget ran out
    (may be None).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class RefinementError(FraclabError):
    """Root refinement failed to reach the requested precision."""


class UndecidableError(RefinementError):
    """A strict comparison could not be certified at the current precision."""
