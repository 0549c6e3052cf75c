"""Exception hierarchy.

The CLI maps top-level classes to exit codes: ConfigError -> 2,
DataError -> 3, FitError -> 4, IncompatibilityError -> 5.
"""


class PmskillError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PmskillError):
    """Invalid or inconsistent run configuration."""


class DataError(PmskillError):
    """Problem with input data or a data-dependent precondition."""


class FormatError(DataError):
    """Unparseable CSV cell (date or value)."""


class DuplicateDateError(DataError):
    """The same calendar date appears more than once in the input."""


class DomainError(DataError):
    """Value outside its physical/mathematical domain (e.g. negative
    concentration at ingestion, |phi| >= 1 for the AR(1) oracle)."""


class EmptyInputError(DataError):
    """An operation that needs at least one value received none."""


class InsufficientHistoryError(DataError):
    """No usable observation before the forecast origin."""


class RangeError(DataError):
    """A date boundary falls outside the series range."""


class PlanError(DataError):
    """No valid evaluation fold could be constructed."""


class DegenerateScaleError(DataError):
    """Standardization requested on a zero-variance training window."""


class SchemaError(DataError):
    """Feature row does not match the training schema."""


class UndefinedSkillError(DataError):
    """Persistence error is zero while the model error is not."""


class FitError(PmskillError):
    """Model estimation failed."""


class NumericError(FitError):
    """Likelihood evaluation became non-finite or degenerate."""


class SelectionError(FitError):
    """Every candidate in an order-selection grid failed to fit."""


class IncompatibilityError(PmskillError):
    """Comparison across runs with mismatched data or horizons."""
