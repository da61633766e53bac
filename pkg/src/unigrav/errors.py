"""Exception hierarchy shared by every module."""


class GravityError(Exception):
    """Base class for all errors raised by unigrav."""


class ValidationError(GravityError, ValueError):
    """Inputs violate a structural invariant."""


class ZeroMarginalError(ValidationError):
    pass


class NonPositiveShockError(ValidationError):
    pass


class BadElasticityError(ValidationError):
    pass


class ConflictingShiftersError(ValidationError):
    pass


class XiWithoutUniversalError(ValidationError):
    pass


class NonSquareError(ValidationError):
    pass


class MissingValueError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class DegenerateDeficitError(ValidationError):
    pass


class NoInternationalTradeError(ValidationError):
    pass


class UndefinedForExplicitCError(GravityError):
    """Wage and welfare changes need the productivity/labor split of c_hat."""


class NumericalError(GravityError, ArithmeticError):
    pass


class NonFiniteError(NumericalError):
    def __init__(self, message, iteration=None, index=None):
        super().__init__(message)
        self.iteration = iteration
        self.index = index


class OverflowShockError(NumericalError):
    pass


class NotConvergedError(GravityError):
    """Raised when the fixed point is not reached within ``max_iter``.

    The last iterate is available as ``solution`` for diagnostics.
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution
