"""Exception hierarchy shared by every smlab module."""

from __future__ import annotations


class SmlabError(Exception):
    """Base class for all library errors."""


class ProfileError(SmlabError, ValueError):
    """A candidate preference profile failed validation."""

    def __init__(self, message: str, *, side: str | None = None, row: int | None = None):
        self.side = side
        self.row = row
        where = f"{side} row {row + 1}: " if side is not None and row is not None else ""
        super().__init__(where + message)


class DuplicateEntry(ProfileError):
    def __init__(self, side: str, row: int, value: int):
        self.value = value
        super().__init__(f"index {value + 1} appears more than once", side=side, row=row)


class OutOfRange(ProfileError):
    def __init__(self, side: str, row: int, value: int, n: int):
        self.value = value
        super().__init__(f"index {value + 1} outside 1..{n}", side=side, row=row)


class RowLengthMismatch(ProfileError):
    def __init__(self, side: str, row: int | None, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} entries, got {got}", side=side, row=row)


class DimensionMismatch(SmlabError, ValueError):
    pass


class InstanceTooLarge(SmlabError):
    def __init__(self, n: int, ceiling: int, what: str = "instance"):
        self.n = n
        self.ceiling = ceiling
        super().__init__(f"{what} with n={n} exceeds the ceiling n<={ceiling}")


class LabelingInvalid(SmlabError, ValueError):
    pass


class UnknownFixture(SmlabError, KeyError):
    def __str__(self) -> str:  # KeyError would repr() the message
        return str(self.args[0]) if self.args else "unknown fixture"


class ParseError(SmlabError, ValueError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class MissingPosition(SmlabError, LookupError):
    """A partial profile was asked for a preference position it does not carry."""
