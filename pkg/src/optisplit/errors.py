"""Exception types raised by optisplit."""


class OptisplitError(Exception):
    """Base class for all library errors."""


class DataError(OptisplitError):
    """Malformed or unusable input data."""

    def __init__(self, message, rows=None):
        super().__init__(message)
        self.rows = list(rows) if rows is not None else []


class SizeError(OptisplitError, ValueError):
    """Too few rows for the requested number of parameters."""


class RankDeficiencyError(OptisplitError):
    """Model matrix does not have full column rank.

    ``aliased`` holds the labels of the columns that were found to be linear
    combinations of the columns preceding them in pivot order.
    """

    def __init__(self, aliased, rank, p):
        self.aliased = list(aliased)
        self.rank = rank
        self.p = p
        names = ", ".join(str(a) for a in self.aliased)
        super().__init__(f"rank {rank} < {p} columns; aliased: {names}")


class EmptyCandidateSetError(OptisplitError):
    """No estimable candidate features remain besides the intercept."""


class ConfigError(OptisplitError, ValueError):
    """Invalid simulation or split configuration."""
