"""
Error types shared by every app.

Each error carries a stable ``code`` that management commands prefix to their
messages and API views return alongside the message.
"""


class ValidityError(ValueError):
    code = 'E-VALIDITY'

    def __init__(self, message):
        super().__init__(message)
        self.message = message

    def as_payload(self):
        return {'error': self.message, 'code': self.code}


class InvalidInputError(ValidityError):
    code = 'E-INPUT'


class UnsupportedKError(ValidityError):
    """Raised for k = 1 where only k > 1 is defined."""
    code = 'E-K'


class DegenerateClusterError(ValidityError):
    code = 'E-DEGENERATE'

    def __init__(self, m, k_col, k=None):
        self.m = m
        self.k_col = k_col
        self.k = k
        where = f" at k={k}" if k is not None else ""
        super().__init__(
            f"gamma[{m}][{k_col}] is zero{where}: cluster {k_col} collapses "
            f"onto duplicate points and membership {m} cannot be weighted"
        )

    def at_k(self, k):
        return DegenerateClusterError(self.m, self.k_col, k)


class InfiniteOddsError(ValidityError):
    code = 'E-ODDS'


class CsvParseError(ValidityError):
    code = 'E-PARSE'

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
