"""Exception types shared across the toolkit."""


class PhasesweepError(Exception):
    """Base class for all toolkit errors."""


class InvalidSeedError(PhasesweepError):
    """Shift-register seed state is degenerate (all zeros)."""


class UnsupportedParameterError(PhasesweepError):
    """Requested parameter value is outside the supported range."""


class InvalidParameterError(PhasesweepError):
    """A numeric parameter violates its precondition."""


class DimensionError(PhasesweepError):
    """Array or sequence shapes are incompatible."""


class InvalidGeometryError(PhasesweepError):
    """Scene or array geometry is degenerate."""


class DegenerateDataError(PhasesweepError):
    """Measured data carries no usable signal for a calibration step."""
