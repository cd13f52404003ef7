"""Exception taxonomy shared across the package."""


class TextSpotError(Exception):
    """Base class for all package errors."""


class DimensionError(TextSpotError, ValueError):
    """Tensor or box shapes are incompatible with an operation."""


class ContractError(TextSpotError, ValueError):
    """An argument violates a documented precondition."""


class NumericHealthError(TextSpotError, ArithmeticError):
    """NaN or infinite values where finite numbers are required."""


class ConfigError(TextSpotError, ValueError):
    """Malformed configuration file or unknown configuration key."""


class CheckpointError(TextSpotError, IOError):
    """Checkpoint file cannot be read, verified, or applied."""


class PlacementError(TextSpotError, ValueError):
    """A word cannot be placed on the canvas at the requested position."""
