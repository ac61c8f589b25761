"""Exception hierarchy."""


class VGMixError(Exception):
    """Base class for errors raised by this package."""


class DomainError(VGMixError, ValueError):
    """Argument outside the domain of a special function or density."""


class NotPositiveDefinite(VGMixError, ValueError):
    """Cholesky factorization hit a non-positive pivot.

    ``pivot`` is the zero-based index of the failing diagonal entry.
    """

    def __init__(self, pivot, message=None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


class DimensionMismatch(VGMixError, ValueError):
    pass


class DegenerateComponent(VGMixError):
    """A mixture component collapsed during an M-step."""

    def __init__(self, component, message):
        self.component = component
        super().__init__(f"component {component}: {message}")


class TooFewObservations(VGMixError, ValueError):
    pass


class AllStartsFailed(VGMixError):
    """Every EM start ended in a degenerate component."""

    def __init__(self, errors):
        self.errors = list(errors)
        detail = "; ".join(str(e) for e in self.errors[:3])
        super().__init__(f"all {len(self.errors)} EM starts failed: {detail}")


class InvalidLabels(VGMixError, ValueError):
    pass


class ModelFormatError(VGMixError, ValueError):
    """A model document failed schema or invariant validation."""
