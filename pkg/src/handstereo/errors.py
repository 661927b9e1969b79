"""Exception types raised across the toolkit."""


class DimensionError(ValueError):
    """Raised when array shapes do not agree or are degenerate."""


class ParameterError(ValueError):
    """Raised for out-of-range algorithm parameters."""


class HandInitError(RuntimeError):
    """No pixel qualified to seed the hand-depth tracker."""


class ManifestError(ValueError):
    """A sequence manifest is malformed or references missing files."""
