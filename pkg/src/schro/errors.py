"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Inputs are valid numbers but describe an unusable setup."""


class NumericalFailure(RuntimeError):
    """An iterative solver did not converge.

    ``diagnostics`` carries whatever the solver knew when it gave up
    (iteration count, last residual, ...).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class SingularJacobian(NumericalFailure):
    """The Newton matrix is numerically singular (typically at a bifurcation)."""


class NotProjectable(ValueError):
    """A pair cannot be scaled onto the Nehari manifold."""


class DegenerateComponent(ValueError):
    """A pair has a vanishing component, so it is not in the Nehari manifold."""
