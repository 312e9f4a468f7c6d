"""Exception types raised across the package."""


class DesBenchError(Exception):
    """Base class for all package-specific errors."""


class ParseError(DesBenchError):
    """A dataset file could not be parsed; the message names the offending line."""


class UnsupportedProblemError(DesBenchError):
    """The data describes a problem outside the supported scope (e.g. not binary)."""


class InsufficientDataError(DesBenchError):
    """Not enough samples of some class to honour a structural requirement."""


class DegenerateBootstrapError(DesBenchError):
    """Repeated bootstrap draws failed to produce a two-class sample."""


class InsufficientNeighborsError(DesBenchError):
    """A neighbor query asked for more samples than the reference set holds."""


class UndefinedMetricError(DesBenchError):
    """A metric is undefined for the given inputs (e.g. single-class AUC)."""


class ContractError(DesBenchError):
    """An argument violates a documented precondition."""
