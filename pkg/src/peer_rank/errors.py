"""Exception types raised across the package."""


class PeerRankError(Exception):
    """Base class for all package errors."""


class DomainError(PeerRankError, ValueError):
    """An argument lies outside the documented range."""


class UnknownEmployeeError(PeerRankError, KeyError):
    """An employee id is not registered in the rating book."""

    def __str__(self):
        return f"unknown employee: {self.args[0]!r}"


class DegenerateInputError(PeerRankError, ValueError):
    """A statistic is undefined for the given data (e.g. zero variance)."""


class ReviewValidationError(PeerRankError, ValueError):
    """A review violates a structural rule (self-review, duplicates, ...)."""


class ParseError(PeerRankError, ValueError):
    """A record in a review or snapshot file could not be read."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message
