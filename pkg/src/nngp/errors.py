"""Shared exception types."""


class DomainError(ValueError):
    """A kernel/quadrature argument left its admissible domain (nonpositive
    diagonal covariance, indefinite 2x2 covariance, arcsine argument beyond
    [-1, 1] past rounding tolerance, ...)."""


class FactorizationError(RuntimeError):
    """Cholesky factorization failed even after the escalating-jitter ladder.
    Carries a diagnostic estimate of the smallest eigenvalue."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
