"""Exception types.

Two families matter downstream: plain usage errors (bad arguments, empty
sources, malformed files) and hypothesis violations, where a precondition of
one of the guarantees fails.  The CLI maps hypothesis violations to exit
code 2 and everything else unexpected to exit code 1, so keeping the split
explicit here is load-bearing.
"""

from __future__ import annotations


class CovergeoError(Exception):
    """Base class for all errors raised by this package."""


class GridFormatError(CovergeoError):
    """Malformed mask file, sidecar header, or inconsistent grid frames."""


class EmptySourceError(CovergeoError):
    """A distance transform was requested from an empty source region."""


class DimensionError(CovergeoError):
    """Operation not supported in this dimension."""


class HypothesisViolation(CovergeoError):
    """A precondition of one of the certified constructions failed.

    The message always contains the failed inequality with the concrete
    numbers, e.g. ``"|A| = 32.0 >= delta^n / n^(n/2) = 32.0"``.
    """


class ErosionEmptyError(HypothesisViolation):
    """The eroded core is empty at the requested radius."""


class StabilityRadiusExceeded(HypothesisViolation):
    """delta exceeds the opening-stability radius of the set."""


class ResolutionFloorError(HypothesisViolation):
    """delta is below the resolution floor (delta >= 4h required)."""


class RemovedSetTooLarge(HypothesisViolation):
    """measure(A) is too large for the requested delta."""


class SymDiffTooLarge(HypothesisViolation):
    """The flat-norm symmetric difference exceeds delta^2 / 2."""


class DeltaLambdaIncompatible(HypothesisViolation):
    """delta does not satisfy 0 < delta < 1/(5 lambda)."""


class LambdaBelowThreshold(HypothesisViolation):
    """lambda is at or below the empty/nonempty transition of the minimizer."""


class NotCompactlyContained(HypothesisViolation):
    """The removed set is not strictly inside the ambient set."""
