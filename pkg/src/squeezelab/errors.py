"""Exception types shared across the package."""


class SqueezeLabError(Exception):
    """Base class for all domain errors raised by squeezelab."""


class ConfigError(SqueezeLabError):
    """A configuration file or parameter set is invalid."""


class DegenerateEnvelopeError(SqueezeLabError):
    """The pump envelope vanishes everywhere on the requested grid."""


class EmptyOverlapError(SqueezeLabError):
    """An operation produced a state with (numerically) zero norm."""


class GridMismatchError(SqueezeLabError):
    """Two spectral objects do not live on compatible axes."""


class NumericError(SqueezeLabError):
    """Non-finite or degenerate numeric input where a finite result is required."""


class WavelengthRangeError(SqueezeLabError):
    """A wavelength lies outside a model's calibrated validity range."""


class UnphysicalDelayError(SqueezeLabError):
    """A group delay below the fold minimum of the dispersion curve."""


class NoFoldError(SqueezeLabError):
    """A dispersion fit has no group-delay minimum inside the data span."""


class FitError(SqueezeLabError):
    """A least-squares fit is rank deficient or otherwise failed."""


class StreamAlignmentError(SqueezeLabError):
    """Two tag streams do not share a common clock-index range."""


class BaselineError(SqueezeLabError):
    """An interference scan has no usable baseline plateau."""


class InsufficientStatisticsError(SqueezeLabError):
    """Too few counts to form the requested estimate."""


class UnsupportedInputError(SqueezeLabError):
    """Input outside the domain an operation supports."""
