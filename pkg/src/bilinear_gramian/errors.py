"""Exception hierarchy shared by all modules.

Each class carries an ``exit_code`` used by the command line front end.
"""


class BilinearError(Exception):
    exit_code = 1


class InputError(BilinearError, ValueError):
    """Malformed arguments, bad index sets, inconsistent shapes."""

    exit_code = 2


class ShapeError(InputError):
    pass


class SizeLimitError(InputError):
    pass


class NumericalError(BilinearError, ArithmeticError):
    exit_code = 3


class SingularMatrixError(NumericalError):
    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class DefinitenessError(NumericalError):
    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class RankDeficiencyError(NumericalError):
    pass


class StabilityError(NumericalError):
    def __init__(self, message, rho=None):
        super().__init__(message)
        self.rho = rho


class ExistenceError(NumericalError):
    """The Kronecker existence test rho(A(x)A + sum F(x)F) < 1 failed."""

    def __init__(self, message, rho=None):
        super().__init__(message)
        self.rho = rho


class TruncationError(NumericalError):
    def __init__(self, message, last_norm=None):
        super().__init__(message)
        self.last_norm = last_norm


class DivergenceError(NumericalError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DiscriminantError(BilinearError):
    """The input-cap discriminant is negative, so the cap is undefined."""

    exit_code = 4


class BudgetError(BilinearError):
    exit_code = 6
