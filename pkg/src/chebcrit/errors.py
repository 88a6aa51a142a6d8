"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: usage errors exit 2, numerical
failures exit 3.  A failed verification is not an exception (the report
carries pass=False and the CLI exits 1).
"""

from __future__ import annotations


class ChebcritError(Exception):
    """Base class for all library errors."""


class UsageError(ChebcritError):
    """A precondition on arguments or configuration was violated."""


class NumericalFailure(ChebcritError):
    """A numerical procedure did not converge or left its validated domain."""


class SingularPointError(NumericalFailure):
    """An identity was evaluated where a required denominator (p') vanishes."""
