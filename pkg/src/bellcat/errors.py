"""Exception types shared across the package."""


class BellCatError(Exception):
    """Base class for all package errors."""


class NumericalError(BellCatError, ArithmeticError):
    """A computation produced a result that violates an internal contract."""


class DegenerateSpectrumError(NumericalError):
    pass


class ConsistencyError(NumericalError):
    """Two independent evaluation routes disagree beyond tolerance."""


class UnderflowError(NumericalError):
    pass


class UnsupportedModelError(BellCatError, ValueError):
    pass
