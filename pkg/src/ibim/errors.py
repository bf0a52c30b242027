"""Exception hierarchy shared by every module."""


class IBIMError(Exception):
    """Base class for all errors raised by this package."""


class InvalidWidth(IBIMError, ValueError):
    pass


class OutsideBand(IBIMError, ValueError):
    """Query point is not in the perpendicular band of an open curve."""


class NonUniqueProjection(IBIMError, ValueError):
    """Query point sits on (or numerically at) the medial axis."""


class NoConvergence(IBIMError, RuntimeError):
    pass


class FocalPointReached(IBIMError, ValueError):
    """1 + eta*kappa <= 0 for some principal curvature."""


class WidthExceedsReach(IBIMError, ValueError):
    pass


class RotationUnsupported(IBIMError, ValueError):
    pass


class DegeneratePolygon(IBIMError, ValueError):
    pass


class ConfigError(IBIMError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
