"""Exception hierarchy shared by the estimators, matrix kernel and tests."""


class IIDTestError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(IIDTestError, ValueError):
    """A model or test parameter is outside its admissible range."""


class StationarityError(ParameterError):
    """GARCH coefficients violate b + c < 1."""


class DegenerateSeriesError(IIDTestError, ValueError):
    """A transformed column has zero empirical variance."""

    def __init__(self, name, message=None):
        self.name = name
        super().__init__(
            message or f"transformed column {name!r} has zero variance; correlations are undefined"
        )


class NotPositiveDefiniteError(IIDTestError, ValueError):
    """Matrix handed to the whitening step is not (numerically) positive definite."""

    def __init__(self, smallest_eigenvalue, message=None):
        self.smallest_eigenvalue = float(smallest_eigenvalue)
        super().__init__(
            message
            or f"matrix is not positive definite (smallest eigenvalue {self.smallest_eigenvalue:.3e})"
        )


class DegenerateVarianceWarning(UserWarning):
    """Emitted when a transformed column is constant."""


class DataError(IIDTestError, ValueError):
    """Input data could not be read or parsed."""
