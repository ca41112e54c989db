"""Cosine, Pearson and Spearman similarity with their vector preprocessing.

Every similarity is evaluated by one row-wise kernel (:func:`cosine_rows`)
on suitably prepared rows: raw rows for cosine, centered rows for Pearson and
centered average ranks for Spearman.  Scalar entry points, batch callers in
the verifier and the metric index therefore produce bit-identical values.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import CorrMetricError, DimensionMismatch, InvalidInput, ZeroNorm, ZeroVariance

__all__ = [
    "Similarity",
    "as_vector",
    "as_rows",
    "center",
    "rank_transform",
    "unit_normalize",
    "cosine",
    "pearson",
    "spearman",
    "similarity",
    "prepare_rows",
    "cosine_rows",
    "unit_rows",
]


class Similarity(str, Enum):
    COSINE = "cosine"
    PEARSON = "pearson"
    SPEARMAN = "spearman"

    @property
    def min_length(self) -> int:
        # a centered length-1 vector is always zero
        return 1 if self is Similarity.COSINE else 2

    @classmethod
    def parse(cls, name: str | Similarity) -> Similarity:
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise InvalidInput(f"unknown similarity {name!r} (choose from {choices})") from None


def as_vector(values: Iterable[float] | np.ndarray) -> np.ndarray:
    """Validate ``values`` as a data vector.

    Returns a read-only one-dimensional float64 array.  Raises
    :class:`InvalidInput` for empty, multi-dimensional or non-finite input.
    """
    x = np.array(values, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInput(f"expected a one-dimensional vector, got shape {x.shape}")
    if x.size == 0:
        raise InvalidInput("empty vector")
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise InvalidInput(f"non-finite entry at position {bad}")
    x.flags.writeable = False
    return x


def as_rows(rows: Sequence[Iterable[float]] | np.ndarray) -> np.ndarray:
    """Validate a collection of equal-length vectors as a 2-D float64 array.

    Errors carry the index of the first offending row.
    """
    if isinstance(rows, np.ndarray) and rows.ndim == 2 and rows.shape[0] > 0 and rows.shape[1] > 0:
        X = np.array(rows, dtype=np.float64)
        finite = np.all(np.isfinite(X), axis=1)
        if not finite.all():
            i = int(np.flatnonzero(~finite)[0])
            bad = int(np.flatnonzero(~np.isfinite(X[i]))[0])
            raise InvalidInput(f"non-finite entry at position {bad}").at_row(i)
        X.flags.writeable = False
        return X
    vectors = list(rows)
    if not vectors:
        raise InvalidInput("no rows given")
    out = []
    width = None
    for i, row in enumerate(vectors):
        try:
            v = as_vector(row)
        except CorrMetricError as err:
            raise err.at_row(i) from err
        if width is None:
            width = v.size
        elif v.size != width:
            raise DimensionMismatch(f"length {v.size}, expected {width}").at_row(i)
        out.append(v)
    X = np.vstack(out)
    X.flags.writeable = False
    return X


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x, y = as_vector(x), as_vector(y)
    if x.size != y.size:
        raise DimensionMismatch(f"vector lengths differ: {x.size} != {y.size}")
    return x, y


def _center_rows(X: np.ndarray) -> np.ndarray:
    return X - np.mean(X, axis=-1, keepdims=True)


def _rank_rows(X: np.ndarray) -> np.ndarray:
    """Average (fractional) 1-based ranks along the last axis."""
    n = X.shape[-1]
    order = np.argsort(X, axis=-1, kind="stable")
    s = np.take_along_axis(X, order, axis=-1)
    pos = np.broadcast_to(np.arange(n), s.shape)
    differs = s[..., 1:] != s[..., :-1]
    starts = np.ones(s.shape, dtype=bool)
    starts[..., 1:] = differs
    ends = np.ones(s.shape, dtype=bool)
    ends[..., :-1] = differs
    first = np.maximum.accumulate(np.where(starts, pos, 0), axis=-1)
    last = np.flip(np.minimum.accumulate(np.flip(np.where(ends, pos, n), axis=-1), axis=-1), axis=-1)
    ranks = np.empty(s.shape, dtype=np.float64)
    np.put_along_axis(ranks, order, 0.5 * (first + last) + 1.0, axis=-1)
    return ranks


def _pow2_scale(X: np.ndarray) -> np.ndarray:
    # exact rescaling by a power of two, keeps squares away from overflow/underflow
    _, e = np.frexp(np.max(np.abs(X), axis=-1, keepdims=True))
    return np.ldexp(X, -e)


def center(x) -> np.ndarray:
    """Subtract the sample mean."""
    out = _center_rows(as_vector(x))
    out.flags.writeable = False
    return out


def rank_transform(x) -> np.ndarray:
    """Average ranks: tied entries share the mean of the positions they occupy.

    >>> rank_transform([10, 20, 20, 30]).tolist()
    [1.0, 2.5, 2.5, 4.0]
    """
    out = _rank_rows(as_vector(x))
    out.flags.writeable = False
    return out


def unit_normalize(x) -> np.ndarray:
    x = as_vector(x)
    xs = _pow2_scale(x)
    norm = np.sqrt(np.sum(xs * xs))
    if norm == 0.0:
        raise ZeroNorm("cannot normalize the zero vector")
    out = xs / norm
    out.flags.writeable = False
    return out


def prepare_rows(X: np.ndarray, sim: Similarity | str) -> np.ndarray:
    """Map rows to vectors whose pairwise cosine equals ``sim``.

    Raises the per-similarity error (tagged with the row index when ``X`` is
    two-dimensional) for rows on which ``sim`` is undefined.
    """
    sim = Similarity.parse(sim)
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[-1]
    if n < sim.min_length:
        raise InvalidInput(f"{sim.value} needs vectors of length >= {sim.min_length}, got {n}")
    if sim is Similarity.COSINE:
        bad = ~np.any(X != 0.0, axis=-1)
        err = ZeroNorm("zero vector has no direction")
        P = X
    else:
        if sim is Similarity.SPEARMAN:
            X = _rank_rows(X)
        bad = np.all(X == X[..., :1], axis=-1)
        P = _center_rows(X)
        bad |= ~np.any(P != 0.0, axis=-1)
        err = ZeroVariance(f"constant vector is undefined for {sim.value}")
    if np.any(bad):
        if X.ndim == 1:
            raise err
        raise err.at_row(int(np.flatnonzero(bad)[0]))
    return P


def cosine_rows(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Row-wise cosine of nonzero rows, clamped into [-1, 1].

    Broadcasts over leading axes.  Each output depends only on its own pair
    of rows, so results do not change with batch composition.
    """
    Xs, Ys = _pow2_scale(X), _pow2_scale(Y)
    dot = np.sum(Xs * Ys, axis=-1)
    sxx = np.sum(Xs * Xs, axis=-1)
    syy = np.sum(Ys * Ys, axis=-1)
    return np.clip(dot / np.sqrt(sxx * syy), -1.0, 1.0)


def unit_rows(X: np.ndarray) -> np.ndarray:
    """Scale nonzero rows to unit Euclidean norm."""
    Xs = _pow2_scale(X)
    return Xs / np.sqrt(np.sum(Xs * Xs, axis=-1, keepdims=True))


def similarity(x, y, sim: Similarity | str) -> float:
    """Similarity ``sim`` of two data vectors, clamped into [-1, 1]."""
    sim = Similarity.parse(sim)
    x, y = _pair(x, y)
    return float(cosine_rows(prepare_rows(x, sim), prepare_rows(y, sim)))


def cosine(x, y) -> float:
    return similarity(x, y, Similarity.COSINE)


def pearson(x, y) -> float:
    """Sample Pearson coefficient, i.e. the cosine of the centered vectors."""
    return similarity(x, y, Similarity.PEARSON)


def spearman(x, y) -> float:
    """Pearson coefficient of the average-rank transformed vectors."""
    return similarity(x, y, Similarity.SPEARMAN)
