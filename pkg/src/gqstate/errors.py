"""Exception types raised across the package."""


class GQStateError(ValueError):
    """Base class; carries the name of the module that raised it."""

    module = "gqstate"


class InvalidStateError(GQStateError):
    module = "gqs"


class InvalidInputError(GQStateError):
    pass


class UnsupportedIntegrationError(GQStateError):
    module = "gqs"


class InsufficientDataError(GQStateError):
    module = "estimator"


class SingularDensityError(GQStateError):
    module = "estimator"


class ConvergenceError(GQStateError):
    module = "spin_chain"

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual
