"""Exception hierarchy shared across the engine."""


class DualhabError(Exception):
    """Base class for all engine errors."""


class SchemaError(DualhabError):
    """Malformed scene / config / manifest document."""


class PlacementError(DualhabError):
    """Object placed outside the grid or on an occupied cell+band."""


class UnknownEntity(DualhabError):
    """Effect or command references an object id that does not exist."""


class LimitViolation(DualhabError):
    """Joint vector outside the chain's joint limits."""


class Unreachable(DualhabError):
    """IK target outside the reachable workspace or no convergence."""


class BalanceViolation(DualhabError):
    """Whole-body targets push the end-effector midpoint off the torso centerline."""


class DimensionMismatch(DualhabError):
    """Joint vectors of mismatched length."""


class ParseError(DualhabError):
    """Unparseable action command."""


class NothingToUndo(DualhabError):
    pass


class NothingToRedo(DualhabError):
    pass


class NoFreeAdjacentCell(DualhabError):
    """Teleport target has no free neighbouring cell."""


class UnknownOutcome(DualhabError):
    """Outcome name not present in the sampled distribution."""


class ProtocolError(DualhabError):
    """Client-side protocol failure (bad frame, unknown command)."""
