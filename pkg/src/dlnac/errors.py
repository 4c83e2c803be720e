"""Exception types raised by the solver stack."""


class DlnError(Exception):
    """Base class for all solver errors."""


class InvalidArgument(DlnError, ValueError):
    pass


class DegenerateCoefficients(DlnError, ArithmeticError):
    pass


class NumericalFailure(DlnError, ArithmeticError):
    pass


class InvalidState(DlnError, RuntimeError):
    pass


class DecompositionFailure(DlnError, ArithmeticError):
    """A sparse factorization hit a non-positive pivot."""

    def __init__(self, message, pivot_index=None, pivot_value=None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value


class ConvergenceFailure(DlnError, RuntimeError):
    """Nonlinear iteration did not converge; carries the last iterate."""

    def __init__(self, message, last_iterate=None, increment=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.increment = increment


class NotReady(DlnError, RuntimeError):
    pass


class StepFloorError(DlnError, RuntimeError):
    pass


class TooManyRejections(DlnError, RuntimeError):
    pass
