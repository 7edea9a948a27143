"""Exception hierarchy shared by every subpackage."""


class DiracFockError(Exception):
    """Base class for all errors raised by :mod:`dfretract`."""


class DomainError(DiracFockError, ValueError):
    """A scalar argument lies outside its admissible range."""


class DimensionMismatch(DiracFockError, ValueError):
    """Matrix or vector shapes are incompatible with the model."""


class PreconditionViolated(DiracFockError, ValueError):
    """An input does not satisfy the documented precondition."""


class NotAdmissible(PreconditionViolated):
    """The density matrix is not supported on the positive spectral subspace of its mean field."""


class IterationError(DiracFockError, RuntimeError):
    """Fixed-point iteration failed.

    The partial trace and the last iterate are attached so callers can report
    what happened before the failure.
    """

    def __init__(self, message, trace=None, last=None):
        super().__init__(message)
        self.trace = trace
        self.last = last


class MaxIterExceeded(IterationError):
    """Residual still above tolerance after the iteration budget."""


class RatioAboveOne(IterationError):
    """An observed residual ratio exceeded the declared contraction bound."""


class StepTooLarge(DiracFockError, RuntimeError):
    """Finite-difference probes left the region where the retraction converges."""


class LineSearchStalled(DiracFockError, RuntimeError):
    """No step length produced a sufficient decrease."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EigensolverFailure(DiracFockError, RuntimeError):
    """LAPACK failed to diagonalize a mean-field operator."""


class ZeroEigenvalue(DiracFockError, ArithmeticError):
    """The mean-field operator has an eigenvalue too close to zero for P+ to be defined."""


class KappaTooLarge(DiracFockError, ValueError):
    """kappa_r >= 1 or lambda_r <= 0: the explicit constants are undefined."""


class SubcriticalityViolated(DiracFockError, ValueError):
    """alpha * Z >= 1: the point-nucleus Coulomb-Dirac operator is supercritical."""


class QuadratureFailure(DiracFockError, RuntimeError):
    """Radial integrals failed their internal accuracy checks."""


class ModelFileError(DiracFockError, IOError):
    """Base class for model-file problems."""


class SchemaMismatch(ModelFileError):
    """The file declares an unsupported schema version or is not a model file."""


class ChecksumMismatch(ModelFileError):
    """Payload checksum does not match, usually a truncated or corrupted file."""
