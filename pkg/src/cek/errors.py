"""Exception types shared across the toolkit."""


class CekError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(CekError):
    """A required column is missing or the column-role mapping is invalid."""


class IngestionError(CekError):
    """A cell failed to parse; carries the offending (row, column)."""

    def __init__(self, row: int, column: str, reason: str):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: {reason}")


class DegenerateCohortError(CekError):
    """The cohort cannot support causal analysis (e.g. single treatment level)."""


class ParameterError(CekError):
    """An argument is outside its valid range."""


class EmptySubsetError(CekError):
    """A subset selector matched no samples."""


class PositivityError(CekError):
    """A treatment arm is missing from the data being fitted or evaluated."""


class LearnerError(CekError):
    """A model fit failed; carries the cross-validation fold index."""

    def __init__(self, fold: int, message: str):
        self.fold = fold
        super().__init__(f"fold {fold}: {message}")
