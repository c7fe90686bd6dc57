"""Exception types shared across the package."""


class PosetRamseyError(Exception):
    """Base class for all package-specific errors."""


class SizeLimitError(PosetRamseyError):
    """A requested object exceeds a configured size cap."""


class CopyCapExceededError(PosetRamseyError):
    """Copy enumeration hit the configured cap; results would be incomplete."""


class UnboundedHeightError(PosetRamseyError):
    """The family never reaches the requested height (e.g. butterflies)."""


class DomainError(PosetRamseyError):
    """Arguments fall outside the range a formula is stated for."""


class SolverUnavailableError(PosetRamseyError):
    """The configured external solver command cannot be executed."""


class ModelIntegrityError(PosetRamseyError):
    """A solver model violates the structure the encoding guarantees."""
