"""Exception hierarchy shared by every module."""


class IfsJacobiError(Exception):
    """Base class for all numerical and format errors raised by the package."""


class SizeMismatch(IfsJacobiError, ValueError):
    pass


class IndexOutOfRange(IfsJacobiError, IndexError):
    pass


class DegenerateMeasure(IfsJacobiError, ValueError):
    pass


class RankExceeded(IfsJacobiError, ValueError):
    """More recurrence coefficients requested than the measure supports."""

    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class DegenerateStep(IfsJacobiError, ArithmeticError):
    """An off-diagonal coefficient vanished during a recursion.

    ``step`` is the recursion index n at which b_{n+1} was found to be zero
    and ``routine`` names the algorithm that was running.
    """

    def __init__(self, message, step=None, routine=None):
        super().__init__(message)
        self.step = step
        self.routine = routine


class NormalizationError(IfsJacobiError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class EigenFailure(IfsJacobiError, ArithmeticError):
    pass


class NoConvergence(IfsJacobiError, ArithmeticError):
    """Fixed-point iteration hit its iteration cap.

    The last iterate and the report are attached so callers can still use them.
    """

    def __init__(self, message, jacobi=None, report=None):
        super().__init__(message)
        self.jacobi = jacobi
        self.report = report


class InvalidTarget(IfsJacobiError, ValueError):
    pass


class EmptyWindow(IfsJacobiError, ValueError):
    pass


class ParseError(IfsJacobiError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
