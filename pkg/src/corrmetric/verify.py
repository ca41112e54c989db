"""Randomized certification of metric properties and the supporting identities.

All generators draw from ``numpy.random.default_rng(seed)`` (PCG64), so every
report is reproducible from the seed it records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .correlation import (
    Similarity,
    _center_rows,
    _rank_rows,
    center,
    cosine,
    pearson,
    prepare_rows,
    unit_normalize,
)
from .errors import InvalidInput, NotApplicable
from .transforms import ONE_MINUS, Transform, apply_transform, distance_rows, pair_distance

__all__ = [
    "DEFAULT_DIMS",
    "SLACK_TOLERANCE",
    "TriangleReport",
    "triangle_suite",
    "Counterexample",
    "planar_counterexample",
    "euclidean_identity_check",
    "pearson_centering_check",
    "transform_identity_check",
    "antipode_collation_check",
    "ordinal_equivalence_check",
    "random_vectors",
]

DEFAULT_DIMS = (2, 3, 10, 50)
# distances are O(1); arccos has unbounded slope at +-1
SLACK_TOLERANCE = 1e-9
DEGENERATE_NORM = 1e-8


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def random_vectors(rng: np.random.Generator, shape: tuple[int, ...], sim: Similarity | str) -> np.ndarray:
    """Standard normal vectors (last axis) valid for ``sim``.

    Draws whose norm, or centered norm for Pearson/Spearman, falls below
    1e-8 are redrawn.
    """
    sim = Similarity.parse(sim)
    X = rng.standard_normal(shape)
    while True:
        if sim is Similarity.COSINE:
            V = X
        elif sim is Similarity.PEARSON:
            V = _center_rows(X)
        else:
            V = _center_rows(_rank_rows(X))
        bad = np.sqrt(np.sum(V * V, axis=-1)) < DEGENERATE_NORM
        if not np.any(bad):
            return X
        X[bad] = rng.standard_normal((int(bad.sum()), shape[-1]))


def _split(total: int, parts: int) -> list[int]:
    q, r = divmod(total, parts)
    return [q + (i < r) for i in range(parts)]


@dataclass(frozen=True)
class TriangleReport:
    similarity: Similarity
    transform: Transform
    dims: tuple[int, ...]
    trials: int
    min_slack: float
    violations: int
    worst_triple: tuple[np.ndarray, np.ndarray, np.ndarray]
    seed: int
    slack_tolerance: float = SLACK_TOLERANCE
    antipodes: bool = False

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def lines(self) -> list[str]:
        out = [
            f"similarity: {self.similarity.value}",
            f"transform: {self.transform.label}",
            f"metricity: {self.transform.metricity.value}",
            f"dims: {' '.join(str(d) for d in self.dims)}",
            f"antipodes: {str(self.antipodes).lower()}",
            f"trials: {self.trials}",
            f"seed: {self.seed}",
            f"slack_tolerance: {_fmt(self.slack_tolerance)}",
            f"min_slack: {_fmt(self.min_slack)}",
            f"violations: {self.violations}",
        ]
        for name, v in zip("xyz", self.worst_triple):
            out.append(f"worst_{name}: " + " ".join(_fmt(t) for t in v))
        return out


def triangle_suite(
    sim: Similarity | str,
    kind: Transform | str,
    dims: Iterable[int] = DEFAULT_DIMS,
    trials: int = 100_000,
    seed: int = 42,
    slack_tolerance: float = SLACK_TOLERANCE,
    antipodes: bool = False,
) -> TriangleReport:
    """Check the triangle inequality on random triples (x, y, z).

    Trials are split evenly over ``dims``.  For every triple all three
    sides are tested, and the slack of a triple is the smallest of
    ``d(x,z) + d(z,y) - d(x,y)`` over the three rotations.  With
    ``antipodes`` set, every other triple uses z = -x so sign-reversed
    duplicates are exercised.
    """
    sim, kind = Similarity.parse(sim), Transform.parse(kind)
    dims = tuple(sorted({int(d) for d in dims}))
    if trials < 1:
        raise InvalidInput(f"trials must be >= 1, got {trials}")
    if not dims or dims[0] < sim.min_length:
        raise InvalidInput(f"dims must be nonempty and >= {sim.min_length} for {sim.value}")

    rng = np.random.default_rng(seed)
    min_slack, violations, worst = math.inf, 0, None
    for dim, count in zip(dims, _split(trials, len(dims))):
        if count == 0:
            continue
        T = random_vectors(rng, (count, 3, dim), sim)
        if antipodes:
            T[1::2, 2] = -T[1::2, 0]
        P = prepare_rows(T, sim)
        d_xy = distance_rows(P[:, 0], P[:, 1], kind)
        d_xz = distance_rows(P[:, 0], P[:, 2], kind)
        d_zy = distance_rows(P[:, 2], P[:, 1], kind)
        slack = np.minimum.reduce([d_xz + d_zy - d_xy, d_xy + d_zy - d_xz, d_xy + d_xz - d_zy])
        violations += int(np.count_nonzero(slack < -slack_tolerance))
        k = int(np.argmin(slack))
        if slack[k] < min_slack:
            min_slack = float(slack[k])
            worst = (T[k, 0].copy(), T[k, 1].copy(), T[k, 2].copy())
    return TriangleReport(sim, kind, dims, trials, min_slack, violations, worst, seed, slack_tolerance, antipodes)


@dataclass(frozen=True)
class Counterexample:
    """Three vectors with d(a, b) > d(a, c) + d(c, b)."""

    vectors: tuple[np.ndarray, np.ndarray, np.ndarray]
    lhs: float
    rhs: float

    @property
    def violation(self) -> float:
        return self.lhs - self.rhs


def planar_counterexample(
    kind: Transform | str = ONE_MINUS, alpha: float = math.pi / 4, beta: float = math.pi / 4
) -> Counterexample:
    """Planar triple a, c, b at angles 0, alpha, alpha + beta from the x-axis.

    The angle between a and b is exactly the sum of the two detour angles,
    where any transform that is strictly convex near 0 must break the
    triangle inequality.
    """
    kind = Transform.parse(kind)
    if kind.is_metric:
        raise NotApplicable(f"{kind.label} is a metric transform; no counterexample exists")
    a = np.array([1.0, 0.0])
    c = np.array([math.cos(alpha), math.sin(alpha)])
    b = np.array([math.cos(alpha + beta), math.sin(alpha + beta)])
    lhs = pair_distance(a, b, Similarity.COSINE, kind)
    rhs = pair_distance(a, c, Similarity.COSINE, kind) + pair_distance(c, b, Similarity.COSINE, kind)
    if not lhs > rhs:
        raise NotApplicable(f"no violation for angles {alpha}, {beta}: lhs={lhs}, rhs={rhs}")
    return Counterexample((a, c, b), lhs, rhs)


def euclidean_identity_check(pairs: int = 1000, dim: int = 10, seed: int = 7) -> float:
    """Max |‖unit(x) - unit(y)‖ - sqrt(2 - 2 cos)| over random pairs."""
    if dim < 2:
        raise InvalidInput("dim must be >= 2")
    rng = np.random.default_rng(seed)
    X = random_vectors(rng, (pairs, 2, dim), Similarity.COSINE)
    worst = 0.0
    for x, y in X:
        chord = float(np.linalg.norm(unit_normalize(x) - unit_normalize(y)))
        worst = max(worst, abs(chord - math.sqrt(2.0 - 2.0 * cosine(x, y))))
    return worst


def pearson_centering_check(pairs: int = 1000, dim: int = 10, seed: int = 7) -> float:
    """Max |pearson(x, y) - cosine(center(x), center(y))| over random pairs."""
    if dim < 2:
        raise InvalidInput("dim must be >= 2")
    rng = np.random.default_rng(seed)
    X = random_vectors(rng, (pairs, 2, dim), Similarity.PEARSON)
    return max(abs(pearson(x, y) - cosine(center(x), center(y))) for x, y in X)


def transform_identity_check(points: int = 10001) -> tuple[float, float]:
    """Max deviation of the algebraic correlation forms from their sine forms.

    Returns ``(max |d2 - sin(arccos(a)/2)|, max |d4 - sin(arccos(a))|)`` over
    an even grid of ``points`` similarity values in [-1, 1].
    """
    a = np.linspace(-1.0, 1.0, points)
    theta = np.arccos(a)
    e2 = np.max(np.abs(apply_transform(a, "correlation") - np.sin(0.5 * theta)))
    e4 = np.max(np.abs(apply_transform(a, "absolute-correlation") - np.sin(theta)))
    return float(e2), float(e4)


def antipode_collation_check(
    sim: Similarity | str, kind: Transform | str, samples: int = 1000, dim: int = 10, seed: int = 11
) -> float:
    """Max d(x, -x) over random x; zero for the collating transforms."""
    sim = Similarity.parse(sim)
    rng = np.random.default_rng(seed)
    X = random_vectors(rng, (samples, dim), sim)
    P, N = prepare_rows(X, sim), prepare_rows(-X, sim)
    return float(np.max(distance_rows(P, N, kind)))


_ORDER_FAMILY = {
    "angular": "angle",
    "correlation": "angle",
    "one-minus": "angle",
    "acute-angular": "acute",
    "absolute-correlation": "acute",
    "power-sine": "acute",
}


def ordinal_equivalence_check(
    sim: Similarity | str,
    kind_a: Transform | str,
    kind_b: Transform | str,
    pairs: int = 1000,
    seed: int = 3,
    dim: int = 5,
    tie_tolerance: float = 1e-12,
) -> bool:
    """True iff two transforms rank random pairs identically.

    Values within ``tie_tolerance`` count as tied, and a tie in one list must
    be a tie in the other.
    """
    sim, kind_a, kind_b = Similarity.parse(sim), Transform.parse(kind_a), Transform.parse(kind_b)
    if _ORDER_FAMILY[kind_a.name] != _ORDER_FAMILY[kind_b.name]:
        raise NotApplicable(f"{kind_a.label} and {kind_b.label} do not derive from the same angle ordering")
    rng = np.random.default_rng(seed)
    X = random_vectors(rng, (pairs, 2, max(dim, sim.min_length)), sim)
    P = prepare_rows(X, sim)

    def order_signs(d: np.ndarray) -> np.ndarray:
        diff = d[:, None] - d[None, :]
        return np.where(np.abs(diff) <= tie_tolerance, 0, np.sign(diff)).astype(np.int8)

    d_a = distance_rows(P[:, 0], P[:, 1], kind_a)
    d_b = distance_rows(P[:, 0], P[:, 1], kind_b)
    return bool(np.array_equal(order_signs(d_a), order_signs(d_b)))
