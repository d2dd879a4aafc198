"""Exception hierarchy for the rotorwalk package."""

from __future__ import annotations


class RotorWalkError(Exception):
    """Base class for all rotorwalk errors."""


class ChainSpecError(RotorWalkError):
    """Invalid chain description."""


class RowSumError(ChainSpecError):
    """A transition row does not sum to exactly 1."""


class NegativeProbError(ChainSpecError):
    """A transition probability is not a positive rational."""


class DanglingVertexError(ChainSpecError):
    """An edge references an undeclared vertex."""


class SelfRedirectError(RotorWalkError):
    """Redirect target is one of the redirected sources."""


class MissingValueError(RotorWalkError):
    """A potential vector lacks a value required by the computation."""


class SingularSystemError(RotorWalkError):
    """The linear system has no unique solution (unreachable targets etc.)."""


class ReducibleChainError(RotorWalkError):
    """Operation requires an irreducible chain."""


class OrderingMismatchError(RotorWalkError):
    """An explicit successor list violates the exact-frequency condition."""


class InfiniteConstantError(RotorWalkError):
    """A bound constant was requested on an untruncated infinite chain."""


class SetupError(RotorWalkError):
    """The chain surgery does not match the requested theorem."""


class BudgetError(RotorWalkError):
    """A step budget was exhausted where termination was expected."""


class UndecidedError(RotorWalkError):
    """Escape detection reached its radius cap without a stable verdict.

    Carries whatever partial state the caller may want to inspect.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class MatchingFailure(RotorWalkError):
    """No perfect matching found; impossible by Hall's condition, so this
    signals an internal inconsistency."""


class NotNormalizedError(RotorWalkError):
    """Probability vector entries are not in (0,1] or do not sum to 1."""


class PeriodLimitError(RotorWalkError):
    """The lowest common denominator exceeds the configured cap."""


class EmptyBoxError(RotorWalkError):
    """A render box contains no lattice points."""


class UsageError(RotorWalkError):
    """Bad command-line usage; names the offending flag."""
