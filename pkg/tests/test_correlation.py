import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from corrmetric import (
    DimensionMismatch,
    InvalidInput,
    ZeroNorm,
    ZeroVariance,
    as_vector,
    center,
    cosine,
    pearson,
    rank_transform,
    spearman,
    unit_normalize,
)
from corrmetric.correlation import _rank_rows, cosine_rows, prepare_rows


def pearson_reference(x, y):
    """Sample Pearson coefficient straight from its defining sums, exactly rounded."""
    n = len(x)
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def exact_pearson(x, y):
    """Pearson in rational arithmetic; returns r**2 and the sign of r."""
    x = [Fraction(v) for v in x]
    y = [Fraction(v) for v in y]
    mx, my = sum(x) / len(x), sum(y) / len(y)
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy * sxy / (sxx * syy), (sxy > 0) - (sxy < 0)


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def vectors(min_size=2, max_size=30):
    return st.lists(finite, min_size=min_size, max_size=max_size)


def pairs(min_size=2):
    return st.integers(min_size, 30).flatmap(
        lambda n: st.tuples(st.lists(finite, min_size=n, max_size=n), st.lists(finite, min_size=n, max_size=n))
    )


def non_degenerate(v):
    return np.ptp(v) > 1e-3 * max(1.0, np.max(np.abs(v)))


class TestDataVector:
    def test_read_only(self):
        x = as_vector([1, 2, 3])
        with pytest.raises(ValueError):
            x[0] = 5.0

    @pytest.mark.parametrize("bad", [[], [1.0, float("nan")], [float("inf")], [[1, 2], [3, 4]]])
    def test_rejects(self, bad):
        with pytest.raises(InvalidInput):
            as_vector(bad)


class TestCenter:
    @pytest.mark.parametrize(
        "x, expected",
        [((1, 2, 3), (-1, 0, 1)), ((5, 5, 5), (0, 0, 0)), ((2, 4), (-1, 1))],
    )
    def test_examples(self, x, expected):
        np.testing.assert_array_equal(center(x), expected)

    def test_empty(self):
        with pytest.raises(InvalidInput):
            center([])

    @given(vectors(min_size=1))
    def test_mean_zero(self, x):
        c = center(x)
        assert c.shape == (len(x),)
        assert abs(math.fsum(c) / len(x)) <= 1e-12 * max(1.0, max(abs(v) for v in x))


class TestRankTransform:
    @pytest.mark.parametrize(
        "x, expected",
        [
            ((10, 20, 20, 30), (1, 2.5, 2.5, 4)),
            ((3, 1, 2), (3, 1, 2)),
            ((7, 7, 7), (2, 2, 2)),
        ],
    )
    def test_examples(self, x, expected):
        np.testing.assert_array_equal(rank_transform(x), expected)

    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=40))
    def test_matches_scipy_average_ranks(self, x):
        r = rank_transform(x)
        np.testing.assert_array_equal(r, stats.rankdata(x, method="average"))
        n = len(x)
        assert r.sum() == n * (n + 1) / 2

    def test_batched_rows_match_single(self):
        rng = np.random.default_rng(0)
        X = rng.integers(0, 4, size=(50, 9)).astype(float)
        R = _rank_rows(X)
        for row, ranks in zip(X, R):
            np.testing.assert_array_equal(ranks, rank_transform(row))


class TestUnitNormalize:
    def test_examples(self):
        np.testing.assert_allclose(unit_normalize((3, 4)), (0.6, 0.8), rtol=0, atol=1e-15)
        np.testing.assert_array_equal(unit_normalize((1, 0, 0)), (1, 0, 0))
        with pytest.raises(ZeroNorm):
            unit_normalize((0, 0))

    @given(vectors(min_size=1))
    def test_unit_norm(self, x):
        if not any(x):
            return
        u = unit_normalize(x)
        assert abs(np.linalg.norm(u) - 1.0) < 1e-12

    def test_tiny_and_huge_values(self):
        for scale in (1e-300, 1e300):
            u = unit_normalize(np.array([3.0, 4.0]) * scale)
            np.testing.assert_allclose(u, (0.6, 0.8), atol=1e-15)


class TestCosine:
    def test_examples(self):
        assert cosine((1, 0), (0, 1)) == 0
        assert cosine((1, 2, 3), (2, 4, 6)) == pytest.approx(1, abs=1e-15)
        assert cosine((1, 2), (-1, -2)) == pytest.approx(-1, abs=1e-15)

    def test_length_one(self):
        assert cosine([2.0], [-3.0]) == -1.0

    def test_errors(self):
        with pytest.raises(DimensionMismatch):
            cosine((1, 2), (1, 2, 3))
        with pytest.raises(ZeroNorm):
            cosine((0, 0), (1, 2))

    @given(pairs(min_size=1), st.floats(1e-3, 1e3))
    def test_scale_and_sign(self, xy, c):
        x, y = (np.array(v) for v in xy)
        if not (np.any(x) and np.any(y)):
            return
        a = cosine(x, y)
        assert -1.0 <= a <= 1.0
        assert cosine(c * x, y) == pytest.approx(a, abs=1e-12)
        assert cosine(-x, y) == pytest.approx(-a, abs=1e-12)
        assert cosine(y, x) == a


class TestPearson:
    def test_examples(self):
        assert pearson((1, 2, 3), (2, 4, 6)) == pytest.approx(1, abs=1e-15)
        assert pearson((1, 2, 3), (3, 2, 1)) == pytest.approx(-1, abs=1e-15)

    def test_derived_example(self):
        expected = pearson_reference((1, 2, 3, 4), (1, 3, 2, 4))
        r2, sign = exact_pearson((1, 2, 3, 4), (1, 3, 2, 4))
        assert r2 == Fraction(16, 25) and sign == 1
        assert expected == pytest.approx(0.8, abs=1e-15)
        assert pearson((1, 2, 3, 4), (1, 3, 2, 4)) == pytest.approx(0.8, abs=1e-15)

    def test_errors(self):
        with pytest.raises(ZeroVariance):
            pearson((5, 5, 5), (1, 2, 3))
        with pytest.raises(ZeroVariance):
            pearson((0.1, 0.1, 0.1), (1, 2, 3))
        with pytest.raises(DimensionMismatch):
            pearson((1, 2), (1, 2, 3))
        with pytest.raises(InvalidInput):
            pearson((1,), (2,))

    @settings(max_examples=200)
    @given(pairs())
    def test_matches_reference(self, xy):
        x, y = xy
        if not (non_degenerate(x) and non_degenerate(y)):
            return
        assert pearson(x, y) == pytest.approx(pearson_reference(x, y), abs=1e-12)

    @given(pairs(), st.floats(1e-2, 1e2), st.floats(-1e3, 1e3))
    def test_affine_invariance(self, xy, a, b):
        x, y = (np.array(v) for v in xy)
        if not (non_degenerate(x) and non_degenerate(y)):
            return
        assert pearson(a * x + b, y) == pytest.approx(pearson(x, y), abs=1e-12)

    @given(pairs())
    def test_equals_centered_cosine(self, xy):
        x, y = xy
        if not (non_degenerate(x) and non_degenerate(y)):
            return
        assert abs(pearson(x, y) - cosine(center(x), center(y))) < 1e-12
        assert abs(pearson(x, y) - pearson(y, x)) <= 1e-15

    def test_self_similarity(self):
        rng = np.random.default_rng(1)
        for x in rng.standard_normal((100, 7)):
            assert pearson(x, x) == pytest.approx(1.0, abs=1e-12)
            assert cosine(x, x) == pytest.approx(1.0, abs=1e-12)
            assert spearman(x, x) == pytest.approx(1.0, abs=1e-12)


class TestSpearman:
    def test_examples(self):
        assert spearman((1, 2, 3), (1, 4, 9)) == pytest.approx(1, abs=1e-15)
        assert spearman((1, 2, 3), (9, 4, 1)) == pytest.approx(-1, abs=1e-15)

    def test_derived_tie_example(self):
        expected = pearson_reference((1, 2.5, 2.5, 4), (1, 2, 3, 4))
        r2, sign = exact_pearson((1, 2.5, 2.5, 4), (1, 2, 3, 4))
        assert r2 == Fraction(9, 10) and sign == 1
        assert spearman((10, 20, 20, 30), (1, 2, 3, 4)) == pytest.approx(expected, abs=1e-15)

    def test_constant_rejected(self):
        with pytest.raises(ZeroVariance):
            spearman((7, 7, 7), (1, 2, 3))

    @given(st.lists(st.integers(-50, 50), min_size=3, max_size=20), st.randoms(use_true_random=False))
    def test_monotone_invariance_is_exact(self, x, rnd):
        x = np.array(x, dtype=float)
        y = np.array([rnd.uniform(-1.0, 1.0) for _ in x])
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            return
        # strictly increasing and exact on small integers
        fx = x**3 + 5 * x + 7
        assert spearman(fx, y) == spearman(x, y)

    def test_matches_scipy(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            x = rng.integers(0, 5, 12).astype(float)
            y = rng.standard_normal(12)
            if np.ptp(x) == 0:
                continue
            assert spearman(x, y) == pytest.approx(stats.spearmanr(x, y).statistic, abs=1e-12)


def test_batch_kernel_is_row_local():
    rng = np.random.default_rng(3)
    X, Y = rng.standard_normal((300, 13)), rng.standard_normal((300, 13))
    batch = cosine_rows(prepare_rows(X, "pearson"), prepare_rows(Y, "pearson"))
    single = [pearson(x, y) for x, y in zip(X, Y)]
    np.testing.assert_array_equal(batch, single)


def test_prepare_rows_reports_row_index():
    X = np.array([[1.0, 2.0], [3.0, 3.0], [4.0, 1.0]])
    with pytest.raises(ZeroVariance) as info:
        prepare_rows(X, "pearson")
    assert info.value.index == 1
