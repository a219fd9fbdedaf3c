"""Exception hierarchy for simulator stages."""


class BackhaulError(Exception):
    """Base class for all simulator errors."""


class ConfigError(BackhaulError, ValueError):
    """Configuration file or override could not be resolved."""


class InvalidParameterError(BackhaulError, ValueError):
    """A parameter is outside the domain an operation supports."""


class InvalidGeometryError(InvalidParameterError):
    """Array geometry cannot produce a channel (zero wavelength, coincident antennas)."""


class DegenerateInputError(InvalidParameterError):
    """Input carries no usable signal, e.g. an all-zero receive stream."""


class IllConditionedError(BackhaulError, ArithmeticError):
    """A least-squares Gram matrix is too close to singular."""


class SingularityError(BackhaulError, ArithmeticError):
    """A matrix that must be inverted is singular."""


class NumericalDegeneracyError(BackhaulError, ArithmeticError):
    """An intermediate quantity left its admissible range."""
