"""Numerical probes for metric-preserving transforms of the angular distance.

A transform ``f`` of the angle is checked on a uniform grid over [0, pi]
for f(0) = 0, monotonicity, the chord (concavity) inequality, reflection
symmetry about pi/2, subadditivity and strict convexity near 0, and then
classified:

* ``CaseA``: increasing and concave on [0, pi]; f(angle) is a metric.
* ``CaseB``: increasing and concave on [0, pi/2] and symmetric about pi/2;
  f(angle) is a metric once x and -x are collated.
* ``NonMetricPreserving``: increasing and strictly convex on some [0, eps];
  f(angle) violates the triangle inequality.
* ``Inconclusive``: none of the above detected.

Grid probing is evidence, not proof.  The defaults (512 points, tolerance
1e-9) are decisive for the smooth catalogued functions; arbitrary user
functions may need a finer grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidInput, ProbeFailure

__all__ = [
    "Classification",
    "FunctionProbe",
    "Violation",
    "CheckResult",
    "MpfReport",
    "chord_check",
    "monotonicity_check",
    "symmetry_check",
    "subadditivity_check",
    "second_derivative_probe",
    "strict_convexity_near_zero",
    "classify_transform",
    "CATALOG",
    "named_function",
]

PI = math.pi
HALF_PI = 0.5 * math.pi
CHORD_WEIGHTS = np.arange(1, 8) / 8.0
CONVEXITY_WINDOWS = (0.5, PI / 8, PI / 16, PI / 32, PI / 64)

Interval = tuple[float, float]
FULL: Interval = (0.0, PI)
HALF: Interval = (0.0, HALF_PI)


class Classification(str, Enum):
    CASE_A = "CaseA"
    CASE_B = "CaseB"
    NON_METRIC_PRESERVING = "NonMetricPreserving"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class FunctionProbe:
    """A real function of the angle, with the grid used to probe it."""

    f: Callable
    grid_resolution: int = 512
    tolerance: float = 1e-9
    name: str = field(default="f", compare=False)

    def __post_init__(self):
        if int(self.grid_resolution) != self.grid_resolution or self.grid_resolution < 16:
            raise InvalidInput(f"grid_resolution must be an integer >= 16, got {self.grid_resolution}")
        if not self.tolerance > 0:
            raise InvalidInput(f"tolerance must be positive, got {self.tolerance}")

    def grid(self, interval: Interval) -> np.ndarray:
        lo, hi = _check_interval(interval)
        return np.linspace(lo, hi, int(self.grid_resolution))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        try:
            y = np.asarray(self.f(x), dtype=np.float64)
            if y.shape != x.shape:
                y = np.broadcast_to(y, x.shape)
        except (TypeError, ValueError):
            y = np.vectorize(lambda v: float(self.f(float(v))), otypes=[np.float64])(x)
        bad = ~np.isfinite(y)
        if np.any(bad):
            loc = float(x.reshape(-1)[np.flatnonzero(bad.reshape(-1))[0]])
            err = ProbeFailure(f"{self.name} is not finite at x={loc!r}")
            err.location = loc
            raise err
        return y


class Violation(NamedTuple):
    """Where a check is worst and by how much (<= 0 means no violation)."""

    location: tuple[float, ...]
    magnitude: float


class CheckResult(NamedTuple):
    ok: bool
    worst: Violation


def _check_interval(interval: Interval) -> Interval:
    lo, hi = float(interval[0]), float(interval[1])
    if not (0.0 <= lo < hi <= PI):
        raise InvalidInput(f"interval must satisfy 0 <= lo < hi <= pi, got {interval}")
    return lo, hi


def _result(excess: np.ndarray, locations: Callable[[int], tuple[float, ...]], tol: float) -> CheckResult:
    k = int(np.argmax(excess))
    worst = float(excess.reshape(-1)[k])
    return CheckResult(worst <= tol, Violation(locations(k), max(worst, 0.0)))


def _chord_gaps(probe: FunctionProbe, interval: Interval):
    """chord - f(mid) for all grid pairs x < y and weights t in {1/8..7/8}."""
    g = probe.grid(interval)
    fg = probe(g)
    i, j = np.triu_indices(g.size, k=1)
    t = CHORD_WEIGHTS[:, None]
    mid = t * g[i] + (1.0 - t) * g[j]
    gap = t * fg[i] + (1.0 - t) * fg[j] - probe(mid)

    def where(k: int) -> tuple[float, float, float]:
        r, c = divmod(k, i.size)
        return (float(g[i[c]]), float(g[j[c]]), float(CHORD_WEIGHTS[r]))

    return gap, where


def chord_check(probe: FunctionProbe, interval: Interval = FULL) -> CheckResult:
    """Concavity via f(t x + (1-t) y) >= t f(x) + (1-t) f(y) on grid pairs.

    The worst location is the triple (x, y, t).
    """
    gap, where = _chord_gaps(probe, interval)
    return _result(gap, where, probe.tolerance)


def monotonicity_check(probe: FunctionProbe, interval: Interval = FULL) -> CheckResult:
    g = probe.grid(interval)
    fg = probe(g)
    drop = fg[:-1] - fg[1:]
    return _result(drop, lambda k: (float(g[k]), float(g[k + 1])), probe.tolerance)


def _symmetry(probe: FunctionProbe) -> CheckResult:
    g = probe.grid(FULL)
    diff = np.abs(probe(g) - probe(PI - g))
    return _result(diff, lambda k: (float(g[k]),), probe.tolerance)


def symmetry_check(probe: FunctionProbe) -> bool:
    """True iff f(x) = f(pi - x) across the grid, up to the tolerance."""
    return _symmetry(probe).ok


def subadditivity_check(probe: FunctionProbe, interval: Interval = FULL) -> CheckResult:
    """f(a + b) <= f(a) + f(b) over grid pairs on [0, hi].

    Sums beyond ``hi`` are evaluated against the constant extension f(hi).
    """
    lo, hi = _check_interval(interval)
    if lo != 0.0:
        raise InvalidInput("subadditivity is probed on intervals starting at 0")
    g = probe.grid(interval)
    fg = probe(g)
    i, j = np.triu_indices(g.size)
    s = g[i] + g[j]
    inside = s <= hi
    fs = np.full(s.shape, fg[-1])
    fs[inside] = probe(s[inside])
    excess = fs - fg[i] - fg[j]
    return _result(excess, lambda k: (float(g[i[k]]), float(g[j[k]])), probe.tolerance)


def second_derivative_probe(probe: FunctionProbe, interval: Interval = FULL) -> CheckResult:
    """Central-difference f'' <= tolerance at interior grid points.

    Advisory: :func:`chord_check` decides the classification.
    """
    lo, hi = _check_interval(interval)
    h = (hi - lo) / probe.grid_resolution
    x = probe.grid(interval)[1:-1]
    fdd = (probe(x + h) - 2.0 * probe(x) + probe(x - h)) / (h * h)
    return _result(fdd, lambda k: (float(x[k]),), probe.tolerance)


def strict_convexity_near_zero(probe: FunctionProbe) -> tuple[float | None, CheckResult]:
    """Look for a window [0, eps] on which f is increasing and strictly convex.

    Strict convexity means every grid chord lies above f by more than the
    tolerance.  Windows shrink from 0.5 to pi/64; the first hit wins.
    Returns ``(eps, chord result on that window)`` or ``(None, result on the
    largest window)``.
    """
    first = None
    for eps in CONVEXITY_WINDOWS:
        gap, where = _chord_gaps(probe, (0.0, eps))
        k = int(np.argmin(gap))
        least = float(gap.reshape(-1)[k])
        concave = _result(gap, where, probe.tolerance)
        if first is None:
            first = concave
        if least > probe.tolerance and monotonicity_check(probe, (0.0, eps)).ok:
            return eps, concave
    return None, first


@dataclass(frozen=True)
class MpfReport:
    name: str
    zero_at_zero: bool
    increasing_on: Interval | None
    chord_ok_on: Interval | None
    symmetric_about_half_pi: bool
    subadditive_ok: bool
    strictly_convex_near_zero: bool
    convexity_window: float | None
    second_derivative_ok: bool
    classification: Classification
    worst_violation: Violation

    def lines(self) -> list[str]:
        def iv(v):
            return "none" if v is None else f"[{v[0]:.17g}, {v[1]:.17g}]"

        loc = ", ".join(f"{v:.17g}" for v in self.worst_violation.location)
        return [
            f"function: {self.name}",
            f"zero_at_zero: {str(self.zero_at_zero).lower()}",
            f"increasing_on: {iv(self.increasing_on)}",
            f"chord_ok_on: {iv(self.chord_ok_on)}",
            f"symmetric_about_half_pi: {str(self.symmetric_about_half_pi).lower()}",
            f"subadditive_ok: {str(self.subadditive_ok).lower()}",
            f"strictly_convex_near_zero: {str(self.strictly_convex_near_zero).lower()}",
            f"convexity_window: {'none' if self.convexity_window is None else f'{self.convexity_window:.17g}'}",
            f"second_derivative_ok: {str(self.second_derivative_ok).lower()}",
            f"worst_violation: ({loc}) {self.worst_violation.magnitude:.17g}",
            f"classification: {self.classification.value}",
        ]


def _widest(check: Callable[[Interval], CheckResult]) -> Interval | None:
    for interval in (FULL, HALF):
        if check(interval).ok:
            return interval
    return None


def classify_transform(probe: FunctionProbe) -> MpfReport:
    """Classify ``probe.f`` against the case-A / case-B / convex-at-zero hypotheses.

    Case A is tried before case B; non-metric-preservation is only reported
    when strict convexity near 0 is actually detected.
    """
    zero = abs(float(probe(np.zeros(1))[0])) <= probe.tolerance
    increasing_on = _widest(lambda iv: monotonicity_check(probe, iv))
    chords = {iv: chord_check(probe, iv) for iv in (FULL, HALF)}
    chord_ok_on = next((iv for iv in (FULL, HALF) if chords[iv].ok), None)
    symmetric = symmetry_check(probe)
    eps, convex = strict_convexity_near_zero(probe)

    if zero and increasing_on == FULL and chord_ok_on == FULL:
        cls, interval = Classification.CASE_A, FULL
    elif zero and increasing_on is not None and chord_ok_on is not None and symmetric:
        cls, interval = Classification.CASE_B, HALF
    elif zero and eps is not None:
        cls, interval = Classification.NON_METRIC_PRESERVING, (0.0, eps)
    else:
        cls, interval = Classification.INCONCLUSIVE, FULL

    worst = convex.worst if interval[1] not in (PI, HALF_PI) else chords[interval].worst
    return MpfReport(
        name=probe.name,
        zero_at_zero=zero,
        increasing_on=increasing_on,
        chord_ok_on=chord_ok_on,
        symmetric_about_half_pi=symmetric,
        subadditive_ok=subadditivity_check(probe, interval).ok,
        strictly_convex_near_zero=eps is not None,
        convexity_window=eps,
        second_derivative_ok=second_derivative_probe(probe, interval).ok,
        classification=cls,
        worst_violation=worst,
    )


def _f3(x):
    return HALF_PI - np.abs(HALF_PI - x)


def _one_minus_cos(x):
    return 1.0 - np.cos(x)


CATALOG: dict[str, Callable] = {
    "f1": lambda x: x,
    "f2": lambda x: np.sin(0.5 * x),
    "f3": _f3,
    "f4": np.sin,
    "one-minus-cos": _one_minus_cos,
}


def named_function(name: str, grid_resolution: int = 512, tolerance: float = 1e-9) -> FunctionProbe:
    """Probe for a catalogued function: f1..f4, ``f5:p`` (sin^p) or ``one-minus-cos``."""
    key, sep, arg = name.strip().lower().partition(":")
    if key == "f5":
        try:
            p = float(arg)
        except ValueError:
            raise InvalidInput(f"f5 needs an exponent, e.g. f5:0.5 (got {name!r})") from None
        if not 0.0 < p <= 1.0:
            raise InvalidInput(f"f5 exponent must satisfy 0 < p <= 1, got {p}")

        def f(x):
            # sin(fl(pi)) ~ 1e-16 becomes ~1e-8 under a root; reflect first
            return np.sin(np.minimum(x, PI - x)) ** p

        return FunctionProbe(f, grid_resolution, tolerance, name=f"f5:{p:g}")
    if sep or key not in CATALOG:
        choices = ", ".join([*CATALOG, "f5:p"])
        raise InvalidInput(f"unknown function {name!r} (choose from {choices})")
    return FunctionProbe(CATALOG[key], grid_resolution, tolerance, name=key)
