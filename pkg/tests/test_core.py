"""Tests for the shared numeric vocabulary."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_carath.core import (
    INF,
    InputError,
    NormSpec,
    PointSet,
    UniformCombination,
    check_seed,
    check_simplex,
    combination_vector,
    l0_count,
    make_rng,
    p_norm,
    q_norm,
)

finite_floats = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
vectors = st.lists(finite_floats, min_size=1, max_size=8)
exponents = st.sampled_from([2.0, 3.0, 4.5, 10.0, math.inf])


class TestNormSpec:
    def test_parse_inf_aliases(self):
        for text in ("inf", "INF", " infinity ", "max"):
            assert NormSpec.parse(text).is_inf

    def test_conjugate_exponent(self):
        assert NormSpec.parse("3").q == pytest.approx(1.5)
        assert NormSpec(2.0).q == pytest.approx(2.0)
        assert INF.q == 1.0

    @pytest.mark.parametrize("text", ["1.5", "abc", "", "nan"])
    def test_rejects_bad_exponents(self, text):
        with pytest.raises(InputError) as info:
            NormSpec.parse(text)
        assert info.value.field == "p"

    def test_label(self):
        assert INF.label() == "inf"
        assert NormSpec(3.0).label() == "3"


class TestNorms:
    def test_p_norm_values(self):
        assert p_norm(np.array([3.0, 4.0]), NormSpec(2.0)) == pytest.approx(5.0)
        assert p_norm(np.array([3.0, -4.0]), INF) == 4.0
        assert p_norm(np.zeros(3), NormSpec(2.0)) == 0.0

    def test_large_exponent_does_not_overflow(self):
        value = p_norm(np.array([1e200, 1e200]), NormSpec(1e6))
        assert math.isfinite(value)
        assert value == pytest.approx(1e200, rel=1e-5)

    def test_q_norm_uses_conjugate(self):
        assert q_norm(np.array([1.0, 1.0]), NormSpec(2.0)) == pytest.approx(math.sqrt(2.0))
        assert q_norm(np.array([1.0, -1.0, 2.0]), INF) == pytest.approx(4.0)

    def test_l0_count(self):
        assert l0_count(np.array([0.0, 1e-13, 0.5, -2.0])) == 2

    @given(vectors, vectors, exponents)
    @settings(max_examples=60)
    def test_triangle_inequality(self, a, b, p):
        size = min(len(a), len(b))
        u, v = np.array(a[:size]), np.array(b[:size])
        norm = NormSpec(p)
        assert p_norm(u + v, norm) <= p_norm(u, norm) + p_norm(v, norm) + 1e-9 * (1 + p_norm(u, norm) + p_norm(v, norm))

    @given(vectors, exponents)
    @settings(max_examples=60)
    def test_dominates_max_norm(self, a, p):
        v = np.array(a)
        assert p_norm(v, NormSpec(p)) >= p_norm(v, INF) * (1 - 1e-12)

    @given(vectors, st.floats(min_value=-50, max_value=50, allow_nan=False), exponents)
    @settings(max_examples=60)
    def test_homogeneity(self, a, scale, p):
        v = np.array(a)
        norm = NormSpec(p)
        assert p_norm(scale * v, norm) == pytest.approx(abs(scale) * p_norm(v, norm), rel=1e-9, abs=1e-9)


class TestUniformCombination:
    def test_sorted_on_construction(self):
        assert UniformCombination((2, 0, 0)).multiset == (0, 0, 2)
        assert UniformCombination.of([3, 1]).multiset == (1, 3)

    def test_weights(self):
        combination = UniformCombination((0, 0, 2))
        np.testing.assert_allclose(combination.weights(3), [2 / 3, 0.0, 1 / 3])
        assert combination.size == 3

    @pytest.mark.parametrize("multiset", [(), (-1, 0)])
    def test_rejects_invalid(self, multiset):
        with pytest.raises(InputError):
            UniformCombination(multiset)

    def test_combination_vector(self):
        X = PointSet([[0.0, 0.0], [2.0, 4.0]])
        np.testing.assert_allclose(combination_vector(UniformCombination((0, 1, 1, 1)), X), [1.5, 3.0])

    def test_combination_vector_out_of_range(self):
        X = PointSet([[0.0], [1.0]])
        with pytest.raises(InputError):
            combination_vector(UniformCombination((0, 2)), X)


class TestPointSet:
    def test_shape_and_gamma(self):
        X = PointSet([[3.0, 4.0], [1.0, 0.0], [0.0, -6.0]])
        assert (X.n, X.dim, len(X)) == (3, 2, 3)
        assert X.gamma(NormSpec(2.0)) == pytest.approx(6.0)
        assert X.gamma(INF) == 6.0

    def test_from_columns(self):
        X = PointSet.from_columns(np.array([[1.0, 2.0], [3.0, 4.0]]))
        np.testing.assert_allclose(X.points, [[1.0, 3.0], [2.0, 4.0]])

    @pytest.mark.parametrize("points", [[[1.0, 2.0], [3.0]], [], [[float("nan")]], "abc"])
    def test_rejects_malformed(self, points):
        with pytest.raises(InputError) as info:
            PointSet(points)
        assert info.value.field == "points"

    def test_points_are_read_only(self):
        X = PointSet([[1.0]])
        with pytest.raises(ValueError):
            X.points[0, 0] = 2.0


class TestSeeds:
    def test_rng_is_reproducible(self):
        first = make_rng(7, 3).random(5)
        np.testing.assert_array_equal(first, make_rng(7, 3).random(5))
        assert not np.array_equal(first, make_rng(7, 4).random(5))

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(InputError):
            check_seed(seed)

    def test_largest_seed(self):
        assert check_seed(2**64 - 1) == 2**64 - 1


class TestSimplex:
    def test_accepts_probability_vector(self):
        np.testing.assert_allclose(check_simplex([0.25, 0.75], "x"), [0.25, 0.75])

    def test_rejects_negative_and_bad_sum(self):
        with pytest.raises(InputError, match="non-negative"):
            check_simplex([-0.5, 1.5], "x")
        with pytest.raises(InputError, match="sum to 1"):
            check_simplex([0.5, 0.6], "y")
