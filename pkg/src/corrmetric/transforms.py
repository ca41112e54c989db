"""Similarity-to-distance transforms.

Two metric families are provided.  ``angular`` and ``correlation`` keep
anti-correlated objects maximally apart; ``acute-angular``,
``absolute-correlation`` and ``power-sine:p`` identify a vector with its sign
reversal and are metrics on those collated classes (pseudo-metrics on raw
vectors).  ``one-minus`` is kept as a deliberately non-metric control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .correlation import Similarity, _pair, as_rows, cosine_rows, prepare_rows, unit_rows
from .errors import InvalidInput

__all__ = [
    "Metricity",
    "Transform",
    "ANGULAR",
    "CORRELATION",
    "ACUTE_ANGULAR",
    "ABSOLUTE_CORRELATION",
    "ONE_MINUS",
    "METRIC_TRANSFORMS",
    "power_sine",
    "angle_of",
    "apply_transform",
    "distance_rows",
    "chord_distance",
    "pair_distance",
    "DistanceMatrix",
    "distance_matrix",
]

HALF_PI = 0.5 * math.pi


class Metricity(str, Enum):
    METRIC_FULL = "metric-full"
    METRIC_COLLATED = "metric-collated"
    NON_METRIC = "non-metric"


_METRICITY = {
    "angular": Metricity.METRIC_FULL,
    "correlation": Metricity.METRIC_FULL,
    "acute-angular": Metricity.METRIC_COLLATED,
    "absolute-correlation": Metricity.METRIC_COLLATED,
    "power-sine": Metricity.METRIC_COLLATED,
    "one-minus": Metricity.NON_METRIC,
}

_UPPER_BOUND = {
    "angular": math.pi,
    "correlation": 1.0,
    "acute-angular": HALF_PI,
    "absolute-correlation": 1.0,
    "power-sine": 1.0,
    "one-minus": 2.0,
}


@dataclass(frozen=True)
class Transform:
    """A similarity-to-distance transform, named by its CLI flag.

    ``p`` is required for ``power-sine`` (0 < p <= 1) and forbidden otherwise.
    """

    name: str
    p: float | None = field(default=None)

    def __post_init__(self):
        if self.name not in _METRICITY:
            choices = ", ".join(_METRICITY)
            raise InvalidInput(f"unknown transform {self.name!r} (choose from {choices})")
        if self.name == "power-sine":
            if self.p is None or not (0.0 < self.p <= 1.0) or not math.isfinite(self.p):
                raise InvalidInput(f"power-sine exponent must satisfy 0 < p <= 1, got {self.p}")
            object.__setattr__(self, "p", float(self.p))
        elif self.p is not None:
            raise InvalidInput(f"transform {self.name!r} takes no exponent")

    @classmethod
    def parse(cls, flag: str | Transform) -> Transform:
        """Parse a kebab-case flag such as ``angular`` or ``power-sine:0.5``."""
        if isinstance(flag, Transform):
            return flag
        name, sep, arg = str(flag).strip().lower().partition(":")
        if not sep:
            return cls(name)
        try:
            p = float(arg)
        except ValueError:
            raise InvalidInput(f"bad exponent in {flag!r}") from None
        return cls(name, p)

    @property
    def label(self) -> str:
        return self.name if self.p is None else f"{self.name}:{self.p:g}"

    @property
    def metricity(self) -> Metricity:
        return _METRICITY[self.name]

    @property
    def is_metric(self) -> bool:
        return self.metricity is not Metricity.NON_METRIC

    @property
    def upper_bound(self) -> float:
        """Largest value the transform can produce."""
        return _UPPER_BOUND[self.name]

    def __call__(self, a):
        return apply_transform(a, self)

    def __str__(self) -> str:
        return self.label


ANGULAR = Transform("angular")
CORRELATION = Transform("correlation")
ACUTE_ANGULAR = Transform("acute-angular")
ABSOLUTE_CORRELATION = Transform("absolute-correlation")
ONE_MINUS = Transform("one-minus")
METRIC_TRANSFORMS = (ANGULAR, CORRELATION, ACUTE_ANGULAR, ABSOLUTE_CORRELATION)


def power_sine(p: float) -> Transform:
    return Transform("power-sine", p)


def angle_of(a):
    """Angle in [0, pi] whose cosine is the similarity ``a``."""
    return np.arccos(np.clip(a, -1.0, 1.0))


def apply_transform(a, kind: Transform | str):
    """Apply ``kind`` to similarity value(s) ``a`` in [-1, 1].

    Returns a float for scalar input, an array otherwise.  The correlation
    and absolute-correlation forms are evaluated algebraically, which keeps
    full precision near a = 1.
    """
    kind = Transform.parse(kind)
    scalar = np.ndim(a) == 0
    a = np.clip(np.asarray(a, dtype=np.float64), -1.0, 1.0)
    name = kind.name
    if name == "angular":
        d = np.arccos(a)
    elif name == "correlation":
        d = np.sqrt(0.5 * (1.0 - a))
    elif name == "acute-angular":
        d = HALF_PI - np.abs(HALF_PI - np.arccos(a))
    elif name == "absolute-correlation":
        d = np.sqrt((1.0 - a) * (1.0 + a))
    elif name == "power-sine":
        d = np.sqrt((1.0 - a) * (1.0 + a)) ** kind.p
    else:
        d = 1.0 - a
    return float(d) if scalar else d


def distance_rows(P: np.ndarray, Q: np.ndarray, kind: Transform | str) -> np.ndarray:
    """Row-wise distances between prepared rows (see ``prepare_rows``).

    Mathematically this is ``apply_transform(cosine_rows(P, Q), kind)``,
    but it is evaluated from the chords ``|u - v|`` and ``|u + v|`` of the
    unit rows, whose ratio fixes the half angle to full relative precision.
    Going through the similarity value instead turns one ulp of rounding in
    a ~ 1 into an angle of ~1.5e-8, which is enough to break the triangle
    inequality between (near) parallel vectors.  ``one-minus``, which is not
    a metric anyway, is taken directly as one minus the cosine.
    """
    return chord_distance(unit_rows(P), unit_rows(Q), Transform.parse(kind))


def chord_distance(U: np.ndarray, V: np.ndarray, kind: Transform) -> np.ndarray:
    """:func:`distance_rows` for rows already scaled to unit norm."""
    if kind.name == "one-minus":
        return 1.0 - cosine_rows(U, V)
    dm = np.sqrt(np.sum((U - V) ** 2, axis=-1))
    dp = np.sqrt(np.sum((U + V) ** 2, axis=-1))
    name = kind.name
    if name == "angular":
        return 2.0 * np.arctan2(dm, dp)
    if name == "correlation":
        return np.minimum(0.5 * dm, 1.0)
    if name == "acute-angular":
        return 2.0 * np.arctan2(np.minimum(dm, dp), np.maximum(dm, dp))
    sine = np.minimum(0.5 * dm * dp, 1.0)
    if name == "absolute-correlation":
        return sine
    return sine**kind.p


def pair_distance(x, y, sim: Similarity | str, kind: Transform | str) -> float:
    """Distance between two data vectors under similarity ``sim``."""
    sim = Similarity.parse(sim)
    x, y = _pair(x, y)
    return float(distance_rows(prepare_rows(x, sim), prepare_rows(y, sim), kind))


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric, zero-diagonal matrix of pairwise distances."""

    entries: np.ndarray
    transform: Transform
    similarity: Similarity
    labels: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def distance_matrix(
    rows: Sequence | np.ndarray,
    sim: Similarity | str,
    kind: Transform | str,
    labels: Sequence[str] | None = None,
    chunk: int = 65536,
) -> DistanceMatrix:
    """Pairwise distances between ``rows``.

    Only the strict upper triangle is evaluated; it is mirrored into the
    lower triangle and the diagonal is left at zero.
    """
    sim, kind = Similarity.parse(sim), Transform.parse(kind)
    X = as_rows(rows)
    n = X.shape[0]
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise InvalidInput(f"{len(labels)} labels for {n} rows")
    P = prepare_rows(X, sim)
    D = np.zeros((n, n), dtype=np.float64)
    iu, ju = np.triu_indices(n, k=1)
    for start in range(0, iu.size, chunk):
        i, j = iu[start : start + chunk], ju[start : start + chunk]
        d = distance_rows(P[i], P[j], kind)
        D[i, j] = d
        D[j, i] = d
    D.flags.writeable = False
    return DistanceMatrix(D, kind, sim, labels)
