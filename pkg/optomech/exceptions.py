"""
Exceptions raised by the simulation pipeline.

Management commands map ParameterValidationError to exit code 1 and every
other SimulationError to exit code 2; the API maps them to 400 / 422.
"""


class SimulationError(Exception):
    """Base class for all pipeline failures."""


class ParameterValidationError(SimulationError, ValueError):
    """A parameter, config key or sweep spec entry is invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConvergenceError(SimulationError):
    """The self-consistent steady state could not be found."""

    def __init__(self, message, residual_history=()):
        self.residual_history = tuple(residual_history)
        super().__init__(message)


class StabilityError(SimulationError):
    """The drift matrix is not Hurwitz, so no steady-state covariance exists."""

    def __init__(self, message, max_real_part=None):
        self.max_real_part = max_real_part
        super().__init__(message)


class PhysicalityError(SimulationError):
    """A covariance matrix violates the uncertainty principle."""


class NumericalError(SimulationError):
    """A linear-algebra routine failed or an integration diverged."""
