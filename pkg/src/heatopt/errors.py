"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid, boundary patch, or run configuration."""


class SingularOperatorError(RuntimeError):
    """Operator is singular: no Dirichlet face, or a coarse factorization failed."""


class SolverBreakdownError(RuntimeError):
    """Conjugate gradient encountered a non-positive curvature direction."""


class MorFailure(RuntimeError):
    """Reduced system could not be solved reliably; fall back to the full model."""


class OptimizationAborted(RuntimeError):
    """Optimization loop stopped early. Carries the partial history."""

    def __init__(self, iteration, history, cause):
        super().__init__(f"optimization aborted at iteration {iteration}: {cause}")
        self.iteration = iteration
        self.history = history
        self.cause = cause
