"""Semantic exception hierarchy.

Public functions never raise bare ``ValueError``; every contract violation
maps to one of the classes below so callers (and the CLI exit-code logic)
can tell "bad input" apart from "numerical machinery failed".
"""

from __future__ import annotations


class SelboundsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SelboundsError, ValueError):
    """Inputs violate a documented precondition (CLI exit code 1)."""


class AllZeroError(ValidationError):
    """Raw weight vector carries no positive mass."""


class InvalidEntryError(ValidationError):
    """A weight/probability entry is negative, NaN or infinite."""


class BadMError(ValidationError):
    """Selected-slot count m outside [1, n] (or m unsupported for the call)."""


class InfeasibleError(ValidationError):
    """No sorted distribution exists for the requested (n, m, pi)."""


class BadPHatError(ValidationError):
    """Repeated-probability value outside [pi/(n-m), (1-pi)/m]."""


class BadEntropyError(ValidationError):
    """Entropy argument outside [0, log2(n)]."""


class BadKError(ValidationError):
    """Requirement k outside [1, m]."""


class DuplicateIdError(ValidationError):
    """Ordered tuple for a without-replacement chain repeats an object."""


class ZeroDenominatorError(ValidationError):
    """Without-replacement chain exhausted all mass before finishing."""


class TooLargeError(ValidationError):
    """Requested computation exceeds a configured size cap."""


class BadConfigError(ValidationError):
    """Malformed configuration file or inconsistent option combination."""


class NumericFailureError(SelboundsError, ArithmeticError):
    """Internal numeric machinery failed to converge (CLI exit code 2)."""
