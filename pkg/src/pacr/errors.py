"""Exception types shared across the package."""


class PacrError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(PacrError, ValueError):
    """A system configuration violates its invariants."""


class SingularityError(PacrError, ValueError):
    """A user sits (numerically) on top of a radiating element.

    The path-loss model diverges below 1e-6 m, so such geometries are
    rejected rather than clamped.
    """


class InfeasibleRegionError(PacrError):
    """A requested layout cannot fit inside the deployment region."""


class InfeasibleSearchError(PacrError):
    """No integer step satisfies the minimum-spacing constraint."""


class DegenerateChannelError(PacrError, ValueError):
    """A beamformer was requested for an all-zero channel vector."""
