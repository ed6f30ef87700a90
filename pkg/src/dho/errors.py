"""Exception and warning types raised by the dho package."""


class DhoError(Exception):
    """Base class for all package errors."""


class DegenerateInput(DhoError, ValueError):
    pass


class DomainError(DhoError, ValueError):
    pass


class TruncationTooSmall(DhoError):
    """The Fock-space cutoff leaves more probability mass out than allowed."""


class NoConvergence(DhoError):
    pass


class NotPure(DhoError):
    pass


class NegativeBeyondTolerance(DhoError):
    """A quantity that must be non-negative came out clearly negative."""


class StepTooLarge(DhoError):
    pass


class EmptyWindow(DhoError):
    pass


class ConfigError(DhoError, ValueError):
    pass


class OverlapUnderflow(RuntimeWarning):
    """An overlap power underflowed to zero."""


class DensityFloorHit(RuntimeWarning):
    """A Bohmian path reached a region where the density is below the floor."""
