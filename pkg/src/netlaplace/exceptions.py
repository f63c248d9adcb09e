"""Exception types raised by the solvers."""

import numpy as np


class NetworkError(ValueError):
    """Invalid network description (bad weights, loops, connectivity, ...)."""


class SolvabilityError(ValueError):
    """The data violate the solvability condition of the requested problem.

    ``residual`` holds the value of the violated condition (for instance the
    total charge of an unbalanced Poisson right-hand side).
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularSystemError(np.linalg.LinAlgError):
    """A matrix that has to be inverted is singular or numerically so."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ResidualError(RuntimeError):
    """Internal self-check failed: a computed solution does not satisfy its equations."""
