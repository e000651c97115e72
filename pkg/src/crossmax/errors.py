"""Exception types raised across the package."""


class CrossmaxError(Exception):
    """Base class for every domain error; the CLI maps these to exit code 1."""


# linear algebra
class SingularMatrix(CrossmaxError, ArithmeticError):
    pass


class DimensionMismatch(CrossmaxError, ValueError):
    pass


class NoConvergence(CrossmaxError, ArithmeticError):
    def __init__(self, message, off_diagonal=None):
        super().__init__(message)
        self.off_diagonal = off_diagonal


class RankDeficient(CrossmaxError, ArithmeticError):
    pass


class TooLarge(CrossmaxError, ValueError):
    pass


class NotDominant(CrossmaxError, ValueError):
    pass


# bounds
class InvalidRank(CrossmaxError, ValueError):
    pass


class InvalidNu(CrossmaxError, ValueError):
    pass


# image codec
class MalformedHeader(CrossmaxError, ValueError):
    pass


class UnsupportedMaxval(CrossmaxError, ValueError):
    pass


class TruncatedData(CrossmaxError, ValueError):
    pass


class TargetUnachievable(CrossmaxError):
    pass


class SingularCore(SingularMatrix):
    pass


class BadMagic(CrossmaxError, ValueError):
    pass


class BadVersion(CrossmaxError, ValueError):
    pass


class IndexOutOfRange(CrossmaxError, ValueError):
    pass


class LengthMismatch(CrossmaxError, ValueError):
    pass


# least squares
class ZeroNorm(CrossmaxError, ValueError):
    pass


class UnknownFunction(CrossmaxError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""
