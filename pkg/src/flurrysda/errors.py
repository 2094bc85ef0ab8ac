"""Exception types shared across the simulator and attack modules."""


class FlurrySdaError(Exception):
    """Base class for all package-specific errors."""


class InvalidRate(FlurrySdaError):
    """A Poisson rate or probability parameter is out of range."""


class HorizonTooShort(FlurrySdaError):
    """The requested horizon cannot fit a single epoch window."""


class WindowUnderflow(FlurrySdaError):
    """A target-epoch window would start before time zero."""


class LabelMismatch(FlurrySdaError):
    """An epoch sample carries the wrong label for the operation."""


class NoFlurries(FlurrySdaError):
    """The observed log contains no detectable flurry."""


class GapNonPositive(FlurrySdaError):
    """A group member has t_u <= r_u, outside the bound's domain."""


class TooLarge(FlurrySdaError):
    """Exhaustive enumeration was requested beyond its feasibility limits."""


class PlanInvalid(FlurrySdaError):
    """An experiment plan fails validation."""
