"""Exception and warning types shared across the package."""


class DegenerateChannelError(Exception):
    """Channel realization too close to rank deficient for null-space work."""


class InvariantViolationError(Exception):
    """A quantity the library guarantees by construction came out wrong."""


class ScheduleError(Exception):
    """Delivery bookkeeping driven outside its valid range; indicates a bug."""


class ChannelParseError(ValueError):
    """Malformed channel text file. Carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class NumericalWarning(UserWarning):
    """A solver or fit looks off but the computation can continue."""
