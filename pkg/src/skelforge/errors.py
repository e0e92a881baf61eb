"""Exception types shared across the engine."""


class SkelforgeError(Exception):
    """Base class for all engine errors."""


class DegenerateStroke(SkelforgeError):
    """Stroke too short to discretize into a polygon."""


class SelfIntersecting(SkelforgeError):
    """Closed stroke crosses itself and could not be repaired."""


class DegenerateAngle(SkelforgeError):
    """Bisector undefined: the two edges are anti-parallel."""


class NumericalCollapse(SkelforgeError):
    """Wavefront propagation failed to make progress on a degenerate input."""


class EmptySkeleton(SkelforgeError):
    """Straight skeleton produced no usable joints."""


class DegenerateSlice(SkelforgeError):
    """A cross-section slice found no boundary hit on one side of the axis."""


class SliceMiss(SkelforgeError):
    """A joint slice found no polygon boundary hit; joint lies outside the shape."""


class UnknownPart(SkelforgeError):
    """Scene operation referenced a part id that does not exist."""


class SchemaVersionMismatch(SkelforgeError):
    """Document carries a schema version this build does not understand."""


class MalformedDocument(SkelforgeError):
    """Document bytes could not be parsed against the scene schema."""


class OracleResolution(SkelforgeError):
    """Wavefront oracle could not separate topology events at the given step."""
