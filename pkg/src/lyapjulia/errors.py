"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad inputs
(the CLI maps these to exit code 2) and :class:`NumericalError` for
algorithms that fail on valid inputs (exit code 3).
"""


class LyapError(Exception):
    pass


class ValidationError(LyapError, ValueError):
    pass


class NumericalError(LyapError, ArithmeticError):
    pass


class DegenerateInput(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class TreeTooLarge(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RootFindingFailed(NumericalError):
    def __init__(self, message: str, index: int | None = None):
        self.index = index
        if index is not None:
            message = f"{message} (orbit {index})"
        super().__init__(message)


class NoConvergence(NumericalError):
    pass


class NotRepelling(NumericalError):
    pass


class NonFiniteObservable(NumericalError):
    def __init__(self, message: str, point: complex | None = None):
        self.point = point
        if point is not None:
            message = f"{message} at z={point!r}"
        super().__init__(message)
