"""Exception taxonomy shared by all snlab modules.

The CLI maps these onto process exit codes (validation 2, convergence 3,
numerical blowup 4), so solver code should raise the most specific class
that applies rather than a bare RuntimeError.
"""


class ValidationError(ValueError):
    """Invalid argument or configuration value."""


class ContractViolationError(ValidationError):
    """A precondition on physical state data was violated (e.g. unnormalized input)."""


class ResolutionError(ValidationError):
    """Requested physical scale cannot be represented on the given grid."""


class ConvergenceError(RuntimeError):
    """An iterative solve stopped without reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BlowupError(RuntimeError):
    """Amplitudes turned non-finite during time stepping."""

    def __init__(self, message, step_index=None, seed=None):
        super().__init__(message)
        self.step_index = step_index
        self.seed = seed


class StepSizeError(RuntimeError):
    """Integrator step too large to maintain its conservation bounds."""
