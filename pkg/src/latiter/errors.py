"""Exception hierarchy shared by every module of the package."""


class LatiterError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(LatiterError, ValueError):
    pass


class OutsideBox(LatiterError, ValueError):
    pass


class UnknownElement(LatiterError, KeyError):
    pass


class CycleDetected(LatiterError, ValueError):
    pass


class NotALattice(LatiterError, ValueError):
    """Raised when some pair of elements lacks a join or a meet."""

    def __init__(self, pair, kind):
        self.pair = pair
        self.kind = kind
        super().__init__(f"elements {pair[0]!r} and {pair[1]!r} have no {kind}")


class GridMismatch(LatiterError, ValueError):
    pass


class NotMonotone(LatiterError, ValueError):
    """Raised when a map fails the order-preservation check.

    ``witness`` holds a pair ``(x, y)`` with ``x`` below ``y`` whose images
    are not ordered.
    """

    def __init__(self, witness, message=None):
        self.witness = witness
        super().__init__(message or f"map is not order-preserving; witness {witness}")


class RegimeViolation(LatiterError, ValueError):
    """Coefficients outside the existence regime; ``condition`` names the failed inequality."""

    def __init__(self, condition, message=None):
        self.condition = condition
        super().__init__(message or f"coefficient hypothesis violated: {condition}")


class RangeEscape(LatiterError, ValueError):
    def __init__(self, where, message=None):
        self.where = where
        super().__init__(message or f"value leaves the box at {where}")


class MaxIterExceeded(LatiterError, RuntimeError):
    """Iteration budget exhausted; ``best`` is the last iterate, ``diagnostics`` a dict."""

    def __init__(self, best, diagnostics):
        self.best = best
        self.diagnostics = diagnostics
        super().__init__(
            f"no convergence after {diagnostics.get('iterations')} sweeps "
            f"(last change {diagnostics.get('last_change'):.3e})"
        )


class MonotoneAscentViolated(LatiterError, RuntimeError):
    pass


class NotASolution(LatiterError, ValueError):
    pass


class TooLarge(LatiterError, ValueError):
    pass


class ExprError(LatiterError, ValueError):
    """Expression parsing or evaluation failure; ``pos`` is a 0-based column when known."""

    def __init__(self, message, pos=None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class ExprSyntaxError(ExprError):
    pass


class UnknownVariable(ExprError):
    pass


class NegativeExponent(ExprError):
    pass


class ConfigError(LatiterError, ValueError):
    pass
