"""
Exception hierarchy for the polytile package
"""


class PolytileError(Exception):
    """Base class for every error raised by polytile"""


class PolygonSyntaxError(PolytileError):
    """Input text is not well-formed polygonal-set JSON"""


class ValidationError(PolytileError):
    """Geometry is well-formed but violates a polygonal-set invariant"""


class IrrationalVertexError(PolytileError):
    """A coordinate cannot be represented exactly as a rational number"""


class TileFormatError(PolytileError):
    """Malformed discrete tile text"""


class InvalidTilingDescription(PolytileError):
    """Malformed tiling description or certificate"""


class WindowTooSmall(PolytileError):
    """The description admits no finite verification window"""


class InvariantViolation(PolytileError):
    """An internal consistency check failed on a verified input"""


class UnsupportedDescription(PolytileError):
    """The requested analysis is not available for this description shape"""


class SessionMismatch(PolytileError):
    """Resume state belongs to a different tile or format version"""
