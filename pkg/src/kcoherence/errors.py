"""Exception types raised by kcoherence."""


class ValidationError(ValueError):
    """Input does not describe a valid state, dimension or parameter."""


class CertificationError(RuntimeError):
    """A certificate check exceeded its tolerance.

    The offending certificate (when one was built) is kept on ``certificate``
    so callers can still report it.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class LpInfeasibleError(CertificationError):
    """The mixture linear program reported infeasibility."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class IterationLimitError(RuntimeError):
    """The simplex solver hit its iteration cap before phase 1 finished."""
