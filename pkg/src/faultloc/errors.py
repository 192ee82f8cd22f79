"""Exception types raised across the package."""


class FaultLocError(Exception):
    """Base class for all package errors."""


class TopologyError(FaultLocError):
    """Malformed or disconnected topology."""


class UnknownPreset(TopologyError):
    pass


class MaskError(FaultLocError):
    pass


class SingularMatrixError(FaultLocError):
    """Normal matrix is singular and no penalty was requested."""


class ImputationError(FaultLocError):
    pass


class DimensionError(FaultLocError, ValueError):
    pass


class ConfigError(FaultLocError):
    pass
