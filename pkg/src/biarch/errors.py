"""Exception types shared across the package."""


class BiarchError(Exception):
    """Base class for all errors raised by this library."""


class NonFinite(BiarchError):
    """Input contains NaN or infinite entries."""


class NotStochastic(BiarchError):
    """Matrix is too far from the requested stochastic structure."""


class ConstantColumn(BiarchError):
    """A column has zero variance and cannot be standardized."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} is constant (zero variance)")


class DimensionMismatch(BiarchError):
    """Operand shapes are inconsistent."""


class MaxIterationsExceeded(BiarchError):
    """The active-set iteration guard tripped (possible numerical cycling)."""


class InvalidRho(BiarchError):
    """Requested within-block correlation is outside the positive-definite range."""


class NoElbow(BiarchError):
    """No grid cell qualifies as an elbow; extend the (k, c) ranges."""


class CsvError(BiarchError):
    """Base class for CSV ingestion failures."""


class ParseError(CsvError):
    """A cell could not be parsed; carries a 1-based (line, column) location."""

    def __init__(self, line: int, column: int, detail: str):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {detail}")


class RaggedRows(CsvError):
    """Rows have inconsistent widths; carries the 1-based offending line."""

    def __init__(self, line: int, expected: int, got: int):
        self.line = line
        super().__init__(f"line {line}: expected {expected} fields, got {got}")


class EmptyFile(CsvError):
    """The file contains no data rows."""


class SchemaVersionMismatch(BiarchError):
    """A model document declares an unsupported schema version."""
