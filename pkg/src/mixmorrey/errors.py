"""Exception types shared across the package."""


class MixMorreyError(Exception):
    """Base class for all package errors."""


class InvalidGridError(MixMorreyError, ValueError):
    """A grid function violates its structural invariants."""


class EmptySupportError(MixMorreyError):
    """No cell center lies inside the requested ball."""


class PreconditionError(MixMorreyError, ValueError):
    """An operation was called outside its stated domain."""


class SaturationError(MixMorreyError, OverflowError):
    """A norm computation overflowed even after rescaling."""


class CorpusError(MixMorreyError):
    """A corpus function or transform is unusable for a check."""


class VanishingTailWarning(UserWarning):
    """The ess-inf tail of a phi family decays to zero (vacuous condition)."""


class EmptyBallGridWarning(UserWarning):
    """Every ball of a supremum search had empty support."""
