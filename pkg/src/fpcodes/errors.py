"""Exception hierarchy shared by every module of the package."""


class FPCError(Exception):
    """Base class for all package errors."""


class DivisionByZero(FPCError, ZeroDivisionError):
    pass


class MixedField(FPCError, TypeError):
    """Operands live in different fields."""


class FieldTooSmall(FPCError, ValueError):
    pass


class IndivisibleShape(FPCError, ValueError):
    pass


class ShapeMismatch(FPCError, ValueError):
    pass


class SingularMatrix(FPCError, ArithmeticError):
    pass


class UnsupportedCarrier(FPCError, TypeError):
    pass


class UndefinedAtTerminal(FPCError, ValueError):
    """The chain map has no successor at (m-1, m-1, t)."""


class ConstraintViolated(FPCError, ValueError):
    pass


class InsufficientResults(FPCError):
    pass


class SingularRecoverySubset(FPCError):
    """The decode systems for this recovery subset are not invertible."""


class PointSelectionFailed(FPCError):
    pass


class StragglerOverload(FPCError):
    """Fewer live workers than the recovery threshold in fail-stop mode."""


class FormatError(FPCError, ValueError):
    """Malformed matrix file or instance manifest."""
