"""Exceptions raised by the library.

Each error also derives from the closest builtin, so callers can catch either the
library type or the builtin one.
"""

__all__ = (
    "DegenerateParameters",
    "EmptyInputError",
    "FormatError",
    "InstanceTooLarge",
    "InsufficientSamples",
    "LearningFailed",
    "NoSparseBasis",
    "ReportWriteError",
    "SubmemError",
    "TrivialDataset",
)


class SubmemError(Exception):
    """Base class for every error raised by submem-core and the app on top of it."""


class EmptyInputError(SubmemError, ValueError):
    """An operation received an empty matrix or sample set."""


class DegenerateParameters(SubmemError, ValueError):
    """Generator parameters outside the supported model (e.g. d far above m)."""


class TrivialDataset(SubmemError, ValueError):
    """The constraint matrix has a trivial null space, so the dataset is {0}."""


class InsufficientSamples(SubmemError, ValueError):
    """The samples do not span the dataset subspace; more samples are needed."""


class InstanceTooLarge(SubmemError, ValueError):
    """A brute-force routine was asked to enumerate past its guard."""


class NoSparseBasis(SubmemError, ValueError):
    """The row space holds fewer than m independent d-sparse vectors."""


class LearningFailed(SubmemError, RuntimeError):
    """ER-SpUD could not assemble m rank-increasing candidate rows."""


class FormatError(SubmemError, ValueError):
    """A matrix or vector text file is malformed."""


class ReportWriteError(SubmemError, OSError):
    """A report file could not be written."""
