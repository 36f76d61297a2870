class Error(Exception):
    """
    base class of all degenspec errors
    """


class SpecError(Error):
    """
    raise when a measure, kernel or run spec is malformed or unreadable
    """


class KernelError(Error):
    """
    raise when a kernel parameter is out of its admissible range
    """


class QuadratureError(Error):
    """
    raise when nested quadrature misses the requested tolerance
    """

    def __init__(self, message: str, estimate: float, achieved: float):
        super().__init__(f"{message} (estimate {estimate!r}, achieved {achieved:.3e})")
        self.estimate = estimate
        self.achieved = achieved


class OracleError(Error):
    """
    raise when the model covariance of the Monte Carlo oracle cannot be factorized
    """


class ConvergenceError(Error):
    """
    raise when an iterative solver exhausts its budget
    """

    def __init__(self, message: str, residual):
        super().__init__(f"{message} (residual {residual})")
        self.residual = residual


class TrustError(Error):
    """
    raise when a query falls into the truncation-unreliable part of a spectrum
    """


class FitError(Error):
    """
    raise when a regression has too few points or is degenerate
    """


class SmallBallError(Error):
    """
    raise when a small ball estimate cannot be produced by the requested method
    """


class StageError(Error):
    """
    raise when a pipeline stage fails
    """

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
