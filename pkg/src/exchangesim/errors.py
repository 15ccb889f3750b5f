"""Exception hierarchy shared across the simulator, with CLI exit codes."""


class SimulationError(Exception):
    """Base class for all simulator errors."""

    exit_code = 1


class ConfigError(SimulationError):
    """Invalid configuration: bad keys, missing units, out-of-range values."""

    exit_code = 2


class ConvergenceError(SimulationError):
    """An iterative solver failed to reach its tolerance."""

    exit_code = 3

    def __init__(self, message, achieved_residual=None):
        super().__init__(message)
        self.achieved_residual = achieved_residual


class InfeasibleError(SimulationError):
    """No feasible point exists (e.g. optimization with impossible constraint)."""

    exit_code = 4

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ResourceError(SimulationError):
    """Problem size exceeds the configured memory/compute budget."""

    exit_code = 5
