"""Tests for the barycenter lower-bound check."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparse_carath.core import InputError
from sparse_carath.lower_bound import (
    LowerBoundCase,
    best_k_uniform_distance,
    support_only_distance,
    verify_lower_bound,
)


class TestCase:
    def test_threshold(self):
        case = LowerBoundCase(16, 2.0, 0.25)
        assert case.q == pytest.approx(2.0)
        assert case.k_threshold == pytest.approx(4.0)

    @pytest.mark.parametrize("d, p, eps", [(16, 2.0, 0.25), (100, 2.0, 0.1)])
    def test_boundary_precondition_is_admitted(self, d, p, eps):
        LowerBoundCase(d, p, eps)

    @pytest.mark.parametrize(
        "d, p, eps, field",
        [(10, 2.0, 0.1, "eps"), (0, 2.0, 0.5, "d"), (16, 1.5, 0.25, "p"), (16, math.inf, 0.25, "p"), (16, 2.0, 1.0, "eps")],
    )
    def test_rejects(self, d, p, eps, field):
        with pytest.raises(InputError) as info:
            LowerBoundCase(d, p, eps)
        assert info.value.field == field


class TestDistances:
    def test_single_vertex(self):
        assert best_k_uniform_distance(16, 1, 2.0) == pytest.approx(math.sqrt(240) / 16)

    def test_full_support_is_exact(self):
        assert best_k_uniform_distance(5, 5, 3.0) == 0.0

    def test_k_range(self):
        with pytest.raises(InputError):
            best_k_uniform_distance(4, 5, 2.0)
        with pytest.raises(InputError):
            support_only_distance(4, 0, 2.0)

    @given(st.integers(min_value=1, max_value=200), st.data(), st.sampled_from([2.0, 2.5, 3.0, 6.0]))
    def test_closed_form_matches_vector(self, d, data, p):
        k = data.draw(st.integers(min_value=1, max_value=d))
        barycenter = np.full(d, 1.0 / d)
        combination = np.zeros(d)
        combination[:k] = 1.0 / k
        direct = float(np.sum(np.abs(combination - barycenter) ** p) ** (1.0 / p))
        assert best_k_uniform_distance(d, k, p) == pytest.approx(direct, rel=1e-9, abs=1e-15)
        assert best_k_uniform_distance(d, k, p) >= support_only_distance(d, k, p) - 1e-15


class TestVerify:
    def test_small_case(self):
        report = verify_lower_bound(LowerBoundCase(16, 2.0, 0.25))
        assert [row.k for row in report.rows] == [1, 2, 3]
        assert report.passed
        payload = report.to_dict()
        assert payload["status"] == "PASS"
        assert payload["k_threshold"] == pytest.approx(4.0)

    def test_hundred_dimensions(self):
        report = verify_lower_bound(LowerBoundCase(100, 2.0, 0.1))
        assert len(report.rows) == 24
        assert report.passed
        assert report.min_distance > 0.1

    @pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
    def test_every_margin_positive(self, p):
        eps = 0.2
        d = math.ceil(eps ** (-p / (p - 1.0)))
        report = verify_lower_bound(LowerBoundCase(d, p, eps))
        assert all(row.margin > 0 for row in report.rows)
        assert all(row.distance == pytest.approx(row.margin + eps) for row in report.rows)

    def test_hundred_dimensions_minimum(self):
        report = verify_lower_bound(LowerBoundCase(100, 2.0, 0.1))
        assert report.min_distance == pytest.approx(0.17795, abs=1e-5)


class TestSimplexGrid:
    @pytest.mark.parametrize("d", [3, 4, 5, 6])
    def test_equal_weights_are_best_on_two_coordinates(self, d):
        barycenter = np.full(d, 1.0 / d)
        best = math.inf
        for t in np.linspace(0.0, 1.0, 1001):
            point = np.zeros(d)
            point[0], point[1] = t, 1.0 - t
            best = min(best, float(np.linalg.norm(point - barycenter)))
        assert best == pytest.approx(best_k_uniform_distance(d, 2, 2.0), abs=1e-9)
