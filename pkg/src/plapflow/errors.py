"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid grid, nonlinearity or experiment configuration."""


class SolverError(RuntimeError):
    """An iterative solver did not reach its tolerance.

    Attributes:
        residual: last residual norm seen before giving up.
        iterations: iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.message = message
        self.residual = residual
        self.iterations = iterations


class PreconditionError(ValueError):
    """Inputs violate a mathematical hypothesis required by an operation."""


class IntegrityError(RuntimeError):
    """A computed trajectory violates a structural property (e.g. energy decrease)."""
