"""Exception types shared across the package."""


class KirchhoffError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(KirchhoffError, ValueError):
    """An argument lies outside the domain of a coefficient or functional."""


class ConfigError(KirchhoffError, ValueError):
    """Invalid problem, basis or stepper configuration."""


class SequencingError(KirchhoffError, ValueError):
    """Samples supplied out of order, or series sampled on different grids."""


class NumericalError(KirchhoffError, RuntimeError):
    """A nonlinear or linear solve failed."""


class StepFailure(NumericalError):
    """Newton iteration inside a time step did not converge.

    Attributes
    ----------
    residual : float
        Scaled residual of the last Newton iterate.
    iterations : int
        Number of Newton iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class AssumptionGateError(KirchhoffError):
    """A probe refused to run because a required hypothesis does not hold.

    The offending :class:`~kirchhoff.model.AssumptionReport` is attached as
    ``report`` and the names of the failed checks as ``failed``.
    """

    def __init__(self, message, report=None, failed=()):
        super().__init__(message)
        self.report = report
        self.failed = tuple(failed)
