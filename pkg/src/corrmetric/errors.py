"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class CorrMetricError(ValueError):
    """Base class for all errors raised by corrmetric.

    ``index`` is set when the error concerns one row of a collection.
    """

    index: int | None = None

    def at_row(self, index: int) -> CorrMetricError:
        """Return a copy of this error tagged with a row index."""
        err = type(self)(f"row {index}: {self}")
        err.index = index
        return err


class InvalidInput(CorrMetricError):
    """Empty, non-finite or otherwise malformed input vector."""


class DimensionMismatch(CorrMetricError):
    """Vectors that must share a length do not."""


class ZeroNorm(CorrMetricError):
    """A vector with zero Euclidean norm was given where a direction is needed."""


class ZeroVariance(CorrMetricError):
    """A constant vector was given to Pearson or Spearman."""


class ProbeFailure(CorrMetricError):
    """A probed function returned a non-finite value."""

    location: float | None = None


class NotApplicable(CorrMetricError):
    """Operation requested for a transform it does not apply to."""


class NonMetricRefused(CorrMetricError):
    """A metric index was requested over a non-metric dissimilarity."""
