"""Exception hierarchy shared by all qsteer modules."""


class SteeringError(Exception):
    """Base class for every error raised by qsteer."""


class InvalidState(SteeringError, ValueError):
    pass


class NotHermitian(InvalidState):
    pass


class NotPositive(InvalidState):
    pass


class BadTrace(InvalidState):
    pass


class NotUnitVector(SteeringError, ValueError):
    pass


class NotTState(SteeringError, ValueError):
    pass


class DegenerateT(SteeringError, ValueError):
    pass


class DegenerateMap(SteeringError, ValueError):
    pass


class EmptyMeasure(SteeringError, ValueError):
    pass


class BadCount(SteeringError, ValueError):
    pass


class EmptySection(SteeringError, ValueError):
    pass


class QuadratureNotConverged(SteeringError, RuntimeError):
    pass


class OutcomeOutsideBox(SteeringError):
    """A steering outcome could not be written as a box combination.

    ``residual`` is the smallest achievable residual norm, which lets callers
    tell a barely-infeasible ansatz (refine the grid) from gross steerability.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual
