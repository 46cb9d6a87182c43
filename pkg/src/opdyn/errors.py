"""Exception types shared across the package."""


class OpdynError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(OpdynError, ValueError):
    """A value violates a model invariant.

    ``code`` is a stable machine-readable identifier (e.g. ``p_not_symmetric``),
    ``path`` optionally locates the offending field in a config document.
    """

    def __init__(self, code, message, path=None):
        self.code = code
        self.path = path
        prefix = f"{path}: " if path else ""
        super().__init__(f"{prefix}{message} [{code}]")


class ConfigError(OpdynError, ValueError):
    """A config document cannot be parsed or fails structural checks."""

    def __init__(self, message, path=None):
        self.path = path
        prefix = f"{path}: " if path else ""
        super().__init__(f"{prefix}{message}")


class DimensionError(OpdynError, ValueError):
    """Operands have incompatible shapes or exceed a hard size cap."""


class ParameterError(OpdynError, ValueError):
    """A numeric argument is out of its admissible range."""
