"""Exception types raised by the public API."""


class FmanovaError(Exception):
    """Base class for every package-specific error."""


class DataValidationError(FmanovaError, ValueError):
    """Invalid user input (data files, arrays, configuration)."""


class MissingCellError(DataValidationError):
    """A (group, subject, variable, time_index) cell is absent from the CSV."""


class NonFiniteError(DataValidationError):
    """A curve value, scale factor or grid point is NaN or infinite."""


class InconsistentDimensionsError(DataValidationError):
    """Subjects or files disagree on the number of variables or time points."""


class GroupTooSmallError(DataValidationError):
    """A group has fewer than two subjects; sample covariances need n_i >= 2."""


class NonPositiveScaleError(DataValidationError):
    """A scaling array contains entries <= 0."""


class DimensionMismatchError(DataValidationError):
    """Matrix or array shapes are incompatible with the requested operation."""


class GridTooShortError(DataValidationError):
    """The time grid has too few points for the requested operation."""


class BadDimensionsError(DataValidationError):
    """A design specification is degenerate or inconsistent (e.g. rank-0 H)."""


class BadConfigError(DataValidationError):
    """A simulation configuration violates its model's constraints."""


class EmptyInputError(DataValidationError):
    """An operation that needs at least one value received an empty sequence."""


class EigenFailureError(FmanovaError, ArithmeticError):
    """The symmetric eigendecomposition did not converge."""


class NumericalError(FmanovaError, ArithmeticError):
    """Internal consistency check failed (e.g. a covariance block is not PSD)."""
