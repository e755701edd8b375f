"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid problem, grid or GA configuration."""


class OperatorError(ValueError):
    """A genetic operator received inputs it cannot act on."""


class EvaluationError(RuntimeError):
    """Objective or constraint evaluation produced a non-finite value."""


class HarnessError(RuntimeError):
    """Experiment orchestration failure (bad inputs, unwritable output)."""
