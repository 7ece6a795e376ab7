"""Exception hierarchy shared by every module."""


class DihedralBridgeError(Exception):
    """Base class for all library errors."""


class ParameterError(DihedralBridgeError, ValueError):
    """A parameter is outside the domain an operation accepts."""


class ResourceError(DihedralBridgeError):
    """An exhaustive enumeration or simulation would exceed its budget."""


class PreconditionError(DihedralBridgeError):
    """A quantum-state precondition does not hold (e.g. rejection weights exceed amplitudes)."""


class ConsistencyError(DihedralBridgeError):
    """An uncompute step found a target register that does not match its function."""


class TailEvent(PreconditionError):
    """A negligible-probability tail event occurred; callers should retry with a fresh input."""
