"""Exception types raised by mpgraph."""

import numpy as np


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """A matrix expected to be positive definite is not."""


class NumericalFailureError(ArithmeticError):
    """An iterative numerical routine failed to converge."""


class DegenerateInputError(ValueError):
    """The data cannot support an estimate (e.g. a constant column)."""


class MatrixParseError(ValueError):
    """A matrix file could not be parsed."""
