"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`LpMahlerError`.  The CLI maps :class:`UsageError` to exit code 1
and every other subclass to exit code 2.
"""


class LpMahlerError(Exception):
    """Base class for library errors."""


class UsageError(LpMahlerError):
    """Bad command line or bad argument combination."""


class InvalidPolytope(LpMahlerError, ValueError):
    """Vertex data violating the polygon invariants."""


class DegenerateInput(InvalidPolytope):
    """Point set whose hull has fewer than three extreme points."""


class AnchorOutside(LpMahlerError, ValueError):
    pass


class DegenerateNeighbors(LpMahlerError, ValueError):
    pass


class OriginNotInterior(LpMahlerError, ValueError):
    pass


class PointNotInterior(LpMahlerError, ValueError):
    pass


class InvalidP(LpMahlerError, ValueError):
    pass


class InfiniteP(LpMahlerError, ValueError):
    pass


class Divergent(LpMahlerError, ArithmeticError):
    pass


class NoConvergence(LpMahlerError, ArithmeticError):
    """Iterative solver gave up; ``best`` holds the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class UnboundedSlide(LpMahlerError, ValueError):
    pass


class OutOfRange(LpMahlerError, ValueError):
    pass


class NoBracket(LpMahlerError, ArithmeticError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class AlreadyMinimal(LpMahlerError):
    pass


class NotQuadratic(LpMahlerError, ArithmeticError):
    pass


class GenerationFailed(LpMahlerError):
    pass


class UnknownSuite(LpMahlerError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown suite"
