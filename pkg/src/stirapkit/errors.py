"""Exception types raised across the package."""


class StirapError(Exception):
    """Base class for all package-specific errors."""


class ComplexPulse(StirapError):
    """An operation requiring a real envelope got a complex one."""


class NonpositiveWindow(StirapError):
    """An averaging time or window length was not positive."""


class NormDriftExceeded(StirapError):
    """Integrator norm drift exceeded the accepted bound (step control failed)."""


class NonFiniteState(StirapError):
    """Propagation produced NaN or infinite amplitudes."""


class EmptyTrajectory(StirapError):
    """A trajectory with no samples was passed where data is required."""


class AllZeroPulses(StirapError):
    """Both pump and Stokes vanish on the whole grid; no angle is defined."""


class GridMismatch(StirapError):
    """Two sampled objects do not share the same time grid."""


class UnreachableTarget(StirapError):
    """A pulse design target cannot be met by any finite-area envelope."""


class ZeroArea(StirapError):
    """A designer needs a nonzero pulse area."""


class NonpositiveArea(StirapError):
    """A closed-form expression needs a strictly positive pulse area."""


class DomainViolation(StirapError):
    """A design constraint left the valid domain (e.g. |f| > 1)."""


class ConfigError(StirapError):
    """A scenario configuration failed to parse or validate."""


class DegenerateAngleWarning(UserWarning):
    """A generalized Rabi frequency vanished where a later angle needs it."""
