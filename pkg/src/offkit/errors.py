"""Exception types raised across the toolkit."""


class OffkitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(OffkitError):
    """An experiment or CLI configuration is malformed or inconsistent."""


class MissingColumn(OffkitError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"column {name!r} not found")


class NonNumericCell(OffkitError):
    def __init__(self, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"non-numeric value at row {row}, column {column!r}")


class NaInBaseFeature(OffkitError):
    """Base features are mandatory; the N/A token may only appear in optional columns."""

    def __init__(self, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"missing value in base feature column {column!r} at row {row}")


class AlreadyMissing(OffkitError):
    """Availability may be injected only into fully available features."""

    def __init__(self, feature: str):
        self.feature = feature
        super().__init__(f"feature {feature!r} already has missing values")


class DegenerateLabels(OffkitError):
    def __init__(self, detail: str = "labels contain a single class"):
        super().__init__(detail)


class EmptySplit(OffkitError):
    def __init__(self, detail: str = "split would leave one side empty"):
        super().__init__(detail)


class Singular(OffkitError):
    def __init__(self, detail: str = "Hessian is singular"):
        super().__init__(detail)


class DimensionMismatch(OffkitError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} feature columns, got {got}")


class InsufficientSubset(OffkitError):
    """An availability subset holds too few rows (or one class) to fit its model."""

    def __init__(self, subset: tuple, rows_found: int):
        self.subset = subset
        self.rows_found = rows_found
        super().__init__(
            f"subset {subset} has {rows_found} usable rows / one class only"
        )


class UnknownSubset(OffkitError):
    def __init__(self, subset: tuple):
        self.subset = subset
        super().__init__(f"no submodel fitted for availability subset {subset}")


class NonBinaryFeature(OffkitError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"column {column!r} contains values outside {{0, 1}}")


class ZeroMassEvent(OffkitError):
    def __init__(self, detail: str = "conditioning event has zero probability mass"):
        super().__init__(detail)


class EmptyDataset(OffkitError):
    def __init__(self, detail: str = "dataset has no rows"):
        super().__init__(detail)


class SingleClass(OffkitError):
    def __init__(self, detail: str = "both classes are required"):
        super().__init__(detail)


class NoMissingRows(OffkitError):
    def __init__(self, detail: str = "no rows with fully withheld optional features"):
        super().__init__(detail)
