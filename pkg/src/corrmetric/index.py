"""Vantage-point tree over correlation-derived metric distances.

Each internal node holds a randomly chosen pivot and the median distance
from the pivot to the node's points; points at most that far go inside
(the pivot included), the rest go outside.  Every point ends up in exactly
one leaf.  Queries skip a subtree when the triangle inequality shows none of
its points can beat the current bound.

The tree is generic over the transform, so the collated transforms work as
well: x and -x are simply distance-0 duplicates.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from .correlation import Similarity, as_rows, as_vector, prepare_rows, unit_rows
from .errors import DimensionMismatch, InvalidInput, NonMetricRefused
from .transforms import Transform, chord_distance, distance_rows

__all__ = ["QueryStats", "Leaf", "VpNode", "VpTree", "build", "brute_force_knn", "brute_force_range"]

# floating-point distances obey the triangle inequality only up to ~1e-15;
# bounds closer than this are not trusted for pruning
PRUNE_MARGIN = 1e-9

Neighbor = tuple[int, float]


@dataclass
class QueryStats:
    distance_evaluations: int = 0
    pruned_subtrees: int = 0
    visited_leaves: int = 0


@dataclass(frozen=True)
class Leaf:
    indices: np.ndarray


@dataclass(frozen=True)
class VpNode:
    pivot: int
    radius: float
    inside: Union[VpNode, Leaf]
    outside: Union[VpNode, Leaf]


class _Query:
    """Per-query distance cache; each point is evaluated at most once."""

    def __init__(self, tree: VpTree, query):
        q = as_vector(query)
        if q.size != tree.dim:
            raise DimensionMismatch(f"query has length {q.size}, index holds length {tree.dim}")
        self.tree = tree
        self.u = unit_rows(prepare_rows(q, tree.similarity))
        self.seen = np.zeros(tree.n, dtype=bool)
        self.dist = np.empty(tree.n, dtype=np.float64)
        self.stats = QueryStats()

    def distances(self, idx: np.ndarray) -> list[Neighbor]:
        """Evaluate not-yet-seen points of ``idx``; return the new (index, distance) pairs."""
        fresh = idx[~self.seen[idx]]
        if fresh.size == 0:
            return []
        d = chord_distance(self.tree.units[fresh], self.u, self.tree.transform)
        self.seen[fresh] = True
        self.dist[fresh] = d
        self.stats.distance_evaluations += fresh.size
        return list(zip(fresh.tolist(), d.tolist()))

    def pivot_distance(self, pivot: int) -> tuple[float, list[Neighbor]]:
        if self.seen[pivot]:
            return float(self.dist[pivot]), []
        new = self.distances(np.array([pivot]))
        return new[0][1], new


@dataclass
class VpTree:
    """Immutable vantage-point tree; build it with :func:`build`."""

    units: np.ndarray
    similarity: Similarity
    transform: Transform
    root: Union[VpNode, Leaf]
    seed: int
    leaf_size: int
    n: int = field(init=False)
    dim: int = field(init=False)

    def __post_init__(self):
        self.n, self.dim = self.units.shape

    def leaves(self) -> Iterator[Leaf]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                yield node
            else:
                stack.extend((node.outside, node.inside))

    def _search(self, query, bound_of, accept) -> QueryStats:
        """Depth-first traversal, nearer child first.

        ``bound_of()`` gives the current pruning radius and ``accept`` receives
        every evaluated (index, distance) pair.
        """
        qs = _Query(self, query)
        stack: list[tuple[Union[VpNode, Leaf], float]] = [(self.root, 0.0)]
        while stack:
            node, lower = stack.pop()
            if lower > bound_of() + PRUNE_MARGIN:
                qs.stats.pruned_subtrees += 1
                continue
            if isinstance(node, Leaf):
                qs.stats.visited_leaves += 1
                for nb in qs.distances(node.indices):
                    accept(nb)
                continue
            dp, new = qs.pivot_distance(node.pivot)
            for nb in new:
                accept(nb)
            gap = dp - node.radius
            if gap <= 0.0:
                stack.append((node.outside, -gap))
                stack.append((node.inside, 0.0))
            else:
                stack.append((node.inside, gap))
                stack.append((node.outside, 0.0))
        return qs.stats

    def knn(self, query, k: int) -> tuple[list[Neighbor], QueryStats]:
        """The ``k`` nearest points as (index, distance), ties by ascending index."""
        if not 1 <= k <= self.n:
            raise InvalidInput(f"k must satisfy 1 <= k <= {self.n}, got {k}")
        best: list[tuple[float, int]] = []  # max-heap on (distance, index) via negation

        def accept(nb: Neighbor) -> None:
            key = (-nb[1], -nb[0])
            if len(best) < k:
                heapq.heappush(best, key)
            elif key > best[0]:
                heapq.heapreplace(best, key)

        def bound() -> float:
            return -best[0][0] if len(best) == k else np.inf

        stats = self._search(query, bound, accept)
        found = [(-neg_i, -neg_d) for neg_d, neg_i in best]
        return sorted(found, key=lambda t: (t[1], t[0])), stats

    def range_query(self, query, radius: float) -> tuple[list[Neighbor], QueryStats]:
        """All points within ``radius`` (inclusive), sorted by (distance, index)."""
        radius = float(radius)
        if not radius >= 0.0:
            raise InvalidInput(f"radius must be >= 0, got {radius}")
        hits: list[Neighbor] = []

        def accept(nb: Neighbor) -> None:
            if nb[1] <= radius:
                hits.append(nb)

        stats = self._search(query, lambda: radius, accept)
        return sorted(hits, key=lambda t: (t[1], t[0])), stats


def _build_node(U: np.ndarray, idx: np.ndarray, kind: Transform, rng: np.random.Generator, leaf_size: int):
    if idx.size <= leaf_size:
        return Leaf(idx)
    pivot = int(idx[rng.integers(idx.size)])
    d = chord_distance(U[idx], U[pivot], kind)
    others = d[idx != pivot]
    radius = float(np.partition(others, (others.size - 1) // 2)[(others.size - 1) // 2])
    inside = d <= radius
    inside[idx == pivot] = True
    if inside.all():
        return Leaf(idx)
    return VpNode(
        pivot,
        radius,
        _build_node(U, idx[inside], kind, rng, leaf_size),
        _build_node(U, idx[~inside], kind, rng, leaf_size),
    )


def build(
    points: Sequence | np.ndarray,
    sim: Similarity | str,
    kind: Transform | str,
    seed: int = 0,
    leaf_size: int = 16,
) -> VpTree:
    """Build a vantage-point tree; pivots are drawn from ``default_rng(seed)``.

    Raises :class:`NonMetricRefused` for non-metric transforms, whose
    pruning would silently drop true neighbours.
    """
    sim, kind = Similarity.parse(sim), Transform.parse(kind)
    if not kind.is_metric:
        raise NonMetricRefused(f"refusing to build index on non-metric transform {kind.label}")
    if leaf_size < 1:
        raise InvalidInput(f"leaf_size must be >= 1, got {leaf_size}")
    U = unit_rows(prepare_rows(as_rows(points), sim))
    U.flags.writeable = False
    rng = np.random.default_rng(seed)
    root = _build_node(U, np.arange(U.shape[0]), kind, rng, leaf_size)
    return VpTree(U, sim, kind, root, seed, leaf_size)


def _all_distances(points, query, sim, kind) -> np.ndarray:
    sim, kind = Similarity.parse(sim), Transform.parse(kind)
    P = prepare_rows(as_rows(points), sim)
    q = as_vector(query)
    if q.size != P.shape[1]:
        raise DimensionMismatch(f"query has length {q.size}, points have length {P.shape[1]}")
    return distance_rows(P, prepare_rows(q, sim), kind)


def brute_force_knn(points, query, k: int, sim, kind) -> list[Neighbor]:
    """Exhaustive k nearest neighbours, ties by ascending index."""
    d = _all_distances(points, query, sim, kind)
    if not 1 <= k <= d.size:
        raise InvalidInput(f"k must satisfy 1 <= k <= {d.size}, got {k}")
    order = np.lexsort((np.arange(d.size), d))[:k]
    return [(int(i), float(d[i])) for i in order]


def brute_force_range(points, query, radius: float, sim, kind) -> list[Neighbor]:
    d = _all_distances(points, query, sim, kind)
    hit = np.flatnonzero(d <= radius)
    order = hit[np.lexsort((hit, d[hit]))]
    return [(int(i), float(d[i])) for i in order]
