"""Exception types shared across the package.

Domain errors map to CLI exit code 1; anything else that escapes is a bug.
"""


class DomainError(Exception):
    """Base class for errors caused by the model parameters, not by usage."""


class MeanCapExceeded(DomainError):
    """Poisson mean above the exact-sampling cap; the trajectory has escaped."""

    def __init__(self, mean: float, cap: float):
        super().__init__(f"Poisson mean {mean:.6g} exceeds cap {cap:.6g}")
        self.mean = mean
        self.cap = cap


class RegionMismatch(DomainError):
    """Parameters do not lie in the region an operation requires."""


class BoxTooSmall(DomainError):
    """The exceptional drift set reaches the edge of the verification box."""


class DefectTooLarge(DomainError):
    """Truncation of the kernel loses more mass than the caller allows."""


class NoConvergence(DomainError):
    """An iteration hit its cap before reaching the requested tolerance."""


class WindowEmpty(DomainError):
    """No usable points for a log-linear fit."""


class NotTransientT2(DomainError):
    """Dominant eigenvalue missing or not above 1."""
