"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Array dimensions are inconsistent with the operation."""


class ConfigError(ValueError):
    """A configuration or weight set is internally inconsistent."""
