"""Exception types shared across the package."""


class CamSchedError(Exception):
    """Base class for all camsched errors."""


class ValidationError(CamSchedError, ValueError):
    """A value violates a documented domain constraint."""


class ShapeMismatchError(CamSchedError, ValueError):
    """Two matrices that must share a shape do not."""


class UnknownDeviceError(CamSchedError, KeyError):
    """Device or algorithm id outside the configured range."""


class SearchSpaceError(CamSchedError, ValueError):
    """Exhaustive enumeration would exceed the configured limit."""


class ConfigError(CamSchedError, ValueError):
    """Malformed or out-of-range run configuration."""


class TraceError(CamSchedError, ValueError):
    """Malformed trace payload or slot index past the horizon."""
