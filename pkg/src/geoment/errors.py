"""Exception types; the CLI maps them onto exit codes."""


class GeomentError(Exception):
    """Base class for library errors."""


class DimensionError(GeomentError, ValueError):
    """Shapes or party structures do not match."""


class InvalidStateError(GeomentError, ValueError):
    """A vector or matrix is not a valid quantum state."""


class BudgetError(GeomentError):
    """A problem exceeds the supported size."""


class StateFileError(GeomentError, ValueError):
    """A state file could not be parsed."""
