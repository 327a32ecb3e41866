"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or parameter values."""


class ParameterError(ConfigError):
    """A distribution or kernel parameter is outside its domain."""


class DegenerateError(ArithmeticError):
    """A numerical quantity that must be nonzero vanished."""


class ResourceError(MemoryError):
    """A request would exceed the configured memory budget."""
