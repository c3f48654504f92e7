"""Exception hierarchy shared by all modules."""


class QRCError(Exception):
    """Base class for errors raised by harmonic_qrc."""


class InvalidParameter(QRCError, ValueError):
    """A scalar or structural argument is outside its allowed range."""


class DimensionMismatch(QRCError, ValueError):
    """Array shapes or mode counts do not fit together."""


class NonPhysicalState(QRCError, ValueError):
    """A covariance matrix violates the uncertainty principle."""


class UnstableHamiltonian(QRCError, ValueError):
    """The potential matrix of a network is not positive definite."""


class SamplingBudgetExhausted(QRCError, RuntimeError):
    """Rejection sampling did not find a feasible draw within its budget."""


class InfeasibleProblem(QRCError, RuntimeError):
    """The optimizer could not produce any feasible candidate."""


class WindowTooSmall(QRCError, IndexError):
    """A requested output slot has already been evicted from the engine window."""


class ConfigError(QRCError, ValueError):
    """Experiment configuration could not be parsed or validated."""


class RealizationError(QRCError, RuntimeError):
    """A task failed inside one realization of an experiment."""

    def __init__(self, realization: int, point: dict, cause: BaseException):
        self.realization = realization
        self.point = dict(point)
        self.cause = cause
        super().__init__(f"realization {realization} at {self.point}: {type(cause).__name__}: {cause}")
