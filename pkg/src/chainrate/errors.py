"""Exception hierarchy.

Every error raised on bad input derives from :class:`ValidationError`, so the
CLI can map the whole family to exit code 1.
"""


class ValidationError(ValueError):
    """Base class for rejected inputs."""


class NonSquare(ValidationError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"transition matrix must be square, got shape {self.shape}")


class NegativeEntry(ValidationError):
    def __init__(self, i, j, value):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"negative entry {value!r} at ({i}, {j})")


class RowSumViolation(ValidationError):
    def __init__(self, i, total):
        self.i, self.total = i, total
        super().__init__(f"row {i} sums to {total!r}, expected 1")


class LengthMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class DiagonalPair(ValidationError):
    def __init__(self, x):
        self.x = x
        super().__init__(f"pair ({x}, {x}) is on the diagonal; residual kernels need distinct states")


class HorizonExceeded(ValidationError):
    def __init__(self, needed, horizon):
        self.needed, self.horizon = needed, horizon
        super().__init__(f"finite schedule defines {horizon} steps, {needed} requested")


class NotPrimitive(ValidationError):
    """Raised when a method needs an irreducible aperiodic matrix.

    ``reason`` is ``"reducible"`` or ``"periodic"``; ``period`` is set for the
    latter and ``unreachable`` holds one (source, target) witness for the former.
    """

    def __init__(self, reason, period=None, unreachable=None):
        self.reason = reason
        self.period = period
        self.unreachable = unreachable
        if reason == "periodic":
            msg = f"matrix is irreducible but periodic with period {period}"
        else:
            msg = f"matrix is reducible: state {unreachable[1]} unreachable from {unreachable[0]}"
        super().__init__(msg)


class NonFinite(ArithmeticError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, field=None, line=None):
        self.field, self.line = field, line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
