"""Tests for sparse-game equilibria, their variants and the exact oracle."""

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sparse_carath.core import ExhaustedError, InfeasiblePointError, InputError, UniformCombination
from sparse_carath.nash import (
    BimatrixGame,
    MixedProfile,
    NormMode,
    SolveConfig,
    bp_objective,
    column_sparsity,
    exact_equilibria,
    exact_nash_oracle,
    normalize_scaled_game,
    small_prob_exponent,
    solve_both_sparse,
    solve_max_welfare,
    solve_scaled_game,
    solve_small_prob,
    solve_sparse_nash,
    sparsity,
    verify_eps_nash,
    welfare_grid,
)

from .conftest import MATCHING_PENNIES


def uniform_equilibrium_game(n: int) -> BimatrixGame:
    """Zero-sum game whose uniform profile is an exact equilibrium (matching pennies, or a cyclic game)."""
    if n == 2:
        A = np.array(MATCHING_PENNIES)
    else:
        A = np.roll(np.eye(n), 1, axis=1) - np.roll(np.eye(n), -1, axis=1)
    return BimatrixGame(A, -A)


class TestGame:
    def test_sum_matrix(self, no_pure_column_game):
        np.testing.assert_allclose(no_pure_column_game.C, [[0.0, -0.5], [-0.5, 0.0]])
        assert no_pure_column_game.n == 2

    def test_rejects_non_square(self):
        with pytest.raises(InputError) as info:
            BimatrixGame(np.zeros((2, 3)), np.zeros((2, 3)))
        assert info.value.field == "A"

    def test_rejects_out_of_range(self):
        with pytest.raises(InputError, match=r"\[-1, 1\]"):
            BimatrixGame(np.eye(2), 2 * np.eye(2))

    def test_from_dict_requires_both_matrices(self):
        with pytest.raises(InputError) as info:
            BimatrixGame.from_dict({"A": MATCHING_PENNIES})
        assert info.value.field == "B"

    def test_dict_round_trip(self, matching_pennies):
        again = BimatrixGame.from_dict(matching_pennies.to_dict())
        np.testing.assert_array_equal(again.B, matching_pennies.B)


class TestSparsity:
    def test_floor(self):
        assert column_sparsity(np.eye(3)) == 4

    def test_dense_columns(self):
        assert column_sparsity(0.5 * np.ones((6, 6))) == 6
        assert sparsity(BimatrixGame(0.5 * np.ones((8, 8)), np.zeros((8, 8)))).p == pytest.approx(3.0)

    @pytest.mark.parametrize(
        "s, m, expected",
        [(16, 2, 6.0), (16, 4, 4.0), (4, 4, 2.0), (8, 8, 2.0), (8, 4, 2.0), (64, 1, 12.0), (32, 2, 8.0), (1024, 4, 16.0)],
    )
    def test_small_prob_exponent(self, s, m, expected):
        assert small_prob_exponent(s, m) == pytest.approx(expected)


class TestVerify:
    def test_uniform_matching_pennies(self, matching_pennies):
        certificate = verify_eps_nash(matching_pennies, MixedProfile(np.array([0.5, 0.5]), np.array([0.5, 0.5])))
        assert certificate.row_regret == pytest.approx(0.0)
        assert certificate.col_regret == pytest.approx(0.0)
        assert certificate.is_eps_nash(0.0)

    def test_pure_profile_regrets(self, matching_pennies):
        certificate = verify_eps_nash(matching_pennies, MixedProfile(np.array([1.0, 0.0]), np.array([1.0, 0.0])))
        assert certificate.row_regret == pytest.approx(0.0)
        assert certificate.col_regret == pytest.approx(2.0)
        assert certificate.pi2 == pytest.approx(1.0)
        assert not certificate.is_eps_nash(1.0)

    def test_profile_size_must_match(self, matching_pennies):
        with pytest.raises(InputError):
            verify_eps_nash(matching_pennies, MixedProfile(np.ones(3) / 3, np.ones(3) / 3))

    def test_profile_rejects_non_simplex(self):
        with pytest.raises(InputError) as info:
            MixedProfile(np.array([0.6, 0.6]), np.array([0.5, 0.5]))
        assert info.value.field == "x"


class TestBilinearObjective:
    def test_value_at_equilibrium(self, matching_pennies):
        profile = MixedProfile(np.array([0.5, 0.5]), np.array([0.5, 0.5]))
        assert bp_objective(matching_pennies, profile, 0.0, 0.0) == pytest.approx(0.0)

    def test_infeasible_point(self, matching_pennies):
        profile = MixedProfile(np.array([0.5, 0.5]), np.array([1.0, 0.0]))
        with pytest.raises(InfeasiblePointError) as info:
            bp_objective(matching_pennies, profile, 0.5, 0.0)
        assert info.value.violation == pytest.approx(0.5)
        assert "A y <= pi1" in info.value.row


class TestSolveConfig:
    def test_multiset_cap(self):
        cfg = SolveConfig()
        assert cfg.multiset_cap(2.0) == 51200
        assert replace(cfg, max_multiset_size=3).multiset_cap(2.0) == 3
        assert cfg.multiset_cap(2.0, eps=1.0) == 512

    @pytest.mark.parametrize(
        "kwargs", [{"eps": 0.0}, {"eps": 2.5}, {"kappa": 0.0}, {"max_multiset_size": 0}, {"seed": -1}]
    )
    def test_rejects(self, kwargs):
        with pytest.raises(InputError):
            SolveConfig(**kwargs)

    def test_norm_mode_parsing(self):
        assert SolveConfig(norm_mode="p").norm_mode is NormMode.P_NORM
        assert NormMode.parse(NormMode.INF_LP) is NormMode.INF_LP
        assert NormMode.parse("INF_LP") is NormMode.INF_LP
        with pytest.raises(InputError):
            NormMode.parse("l2")


class TestSolveSparseNash:
    def test_matching_pennies(self, matching_pennies, small_config):
        certificate = solve_sparse_nash(matching_pennies, small_config)
        assert certificate.is_eps_nash(0.1)
        assert certificate.u_used == UniformCombination((0,))
        assert certificate.extras["candidates_tried"] == 1
        assert certificate.extras["multiset_size"] == 1
        assert certificate.residual < 0.05

    def test_zero_game_accepts_first_candidate(self):
        zero = BimatrixGame(np.zeros((3, 3)), np.zeros((3, 3)))
        certificate = solve_sparse_nash(zero, SolveConfig(eps=0.1, max_multiset_size=2, workers=1))
        assert certificate.extras["candidates_tried"] == 1
        assert certificate.max_regret <= 0.1

    def test_three_by_three_coordination(self):
        game = BimatrixGame(np.eye(3), np.eye(3))
        certificate = solve_sparse_nash(game, SolveConfig(eps=0.2, max_multiset_size=2, workers=1))
        assert verify_eps_nash(game, certificate.profile).max_regret <= 0.2 + 1e-9

    def test_p_norm_mode(self, matching_pennies, small_config):
        certificate = solve_sparse_nash(matching_pennies, replace(small_config, norm_mode=NormMode.P_NORM))
        assert certificate.is_eps_nash(0.1)
        assert certificate.extras["norm"] == "2"

    def test_planted_candidate_first(self, matching_pennies, small_config):
        certificate = solve_sparse_nash(matching_pennies, small_config, planted=[UniformCombination((1,))])
        assert certificate.u_used == UniformCombination((1,))
        assert certificate.extras["candidates_tried"] == 1

    def test_exhausted(self, no_pure_column_game):
        cfg = SolveConfig(eps=0.1, max_multiset_size=1, workers=1)
        with pytest.raises(ExhaustedError) as info:
            solve_sparse_nash(no_pure_column_game, cfg)
        assert info.value.largest_size == 1
        assert info.value.payload["status"] == "EXHAUSTED"
        assert info.value.payload["candidates_tried"] == 2

    def test_randomized_mode(self, matching_pennies, small_config):
        cfg = replace(small_config, randomized_mode=True, randomized_trials=5)
        assert solve_sparse_nash(matching_pennies, cfg).is_eps_nash(0.1)

    def test_parallel_matches_sequential(self, matching_pennies, small_config):
        sequential = solve_sparse_nash(matching_pennies, small_config)
        parallel = solve_sparse_nash(matching_pennies, replace(small_config, workers=4))
        assert parallel.u_used == sequential.u_used

    def test_certificate_payload(self, matching_pennies, small_config):
        payload = solve_sparse_nash(matching_pennies, small_config).to_dict()
        assert payload["status"] == "OK"
        assert payload["u_used"] == [0]
        assert set(payload) >= {"x", "y", "row_regret", "col_regret", "pi1", "pi2", "residual", "p"}


class TestVariants:
    def test_small_probabilities(self, matching_pennies, small_config):
        certificate = solve_small_prob(matching_pennies, 2, small_config)
        assert certificate.is_eps_nash(0.1)
        assert certificate.extras["norm"] == "2"

    def test_small_probabilities_range(self, matching_pennies, small_config):
        with pytest.raises(InputError) as info:
            solve_small_prob(matching_pennies, 3, small_config)
        assert info.value.field == "m"

    @pytest.mark.parametrize("n", range(2, 12))
    def test_small_probabilities_with_uniform_equilibrium(self, n):
        certificate = solve_small_prob(uniform_equilibrium_game(n), n, SolveConfig(eps=0.25, max_multiset_size=2, workers=1))
        assert certificate.is_eps_nash(0.25)
        assert certificate.extras["norm"] == "2"

    def test_both_sparse_matching_pennies(self, matching_pennies):
        certificate = solve_both_sparse(matching_pennies, SolveConfig(eps=0.2, max_multiset_size=2, workers=1))
        assert verify_eps_nash(matching_pennies, certificate.profile).max_regret <= 0.2 + 1e-9

    def test_both_sparse_declared_sparsity(self):
        game = BimatrixGame(0.5 * np.ones((6, 6)), np.zeros((6, 6)))
        with pytest.raises(InputError) as info:
            solve_both_sparse(game, SolveConfig(eps=0.2, max_multiset_size=1, workers=1), s=4)
        assert info.value.field == "s"
        assert "found 6" in str(info.value)

    def test_both_sparse_rejects_non_positive_sparsity(self, matching_pennies, small_config):
        with pytest.raises(InputError):
            solve_both_sparse(matching_pennies, small_config, s=0)

    def test_normalize_scaled_game(self):
        A = np.array(MATCHING_PENNIES)
        game, eps_scale = normalize_scaled_game(A, -A, 4.0, 0.25, 0.0)
        np.testing.assert_allclose(game.A, A)
        np.testing.assert_allclose(game.B, -A / 16.0)
        assert eps_scale == pytest.approx(0.25 / 4.0)

    def test_normalize_without_rescale(self):
        A = np.array(MATCHING_PENNIES)
        with pytest.raises(InputError):
            normalize_scaled_game(A, -A, 4.0, 1.0, 0.0, rescale=False)

    def test_scaled_game(self, small_config):
        A = 0.5 * np.array(MATCHING_PENNIES)
        game = BimatrixGame(A, 0.5 - A)
        certificate = solve_scaled_game(game, 1.0, 1.0, -0.5, small_config)
        assert certificate.is_eps_nash(0.1)
        assert certificate.extras["eps_scale"] == pytest.approx(1.0)
        assert verify_eps_nash(game, certificate.profile).max_regret <= 0.1 + 1e-9

    def test_both_sparse(self, coordination, small_config):
        certificate = solve_both_sparse(coordination, small_config)
        assert certificate.is_eps_nash(0.1)
        assert certificate.extras["w_used"] == [0]
        np.testing.assert_allclose(certificate.profile.x, [1.0, 0.0], atol=1e-9)

    def test_welfare_grid(self):
        grid = welfare_grid(0.1)
        assert len(grid) == 161
        assert grid[0] == -2.0
        assert grid[-1] == pytest.approx(2.0)

    def test_max_welfare(self, coordination, small_config):
        certificate = solve_max_welfare(coordination, small_config)
        assert certificate.is_eps_nash(0.1)
        assert certificate.extras["welfare_floor"] >= 1.9
        assert certificate.extras["welfare"] >= 1.9


class TestOracle:
    def test_matching_pennies(self, matching_pennies):
        [profile] = exact_nash_oracle(matching_pennies)
        np.testing.assert_allclose(profile.x, [0.5, 0.5])
        np.testing.assert_allclose(profile.y, [0.5, 0.5])

    def test_coordination_has_three(self, coordination):
        found = {(tuple(p.x.round(9)), tuple(p.y.round(9))) for p in exact_nash_oracle(coordination)}
        assert found == {
            ((1.0, 0.0), (1.0, 0.0)),
            ((0.0, 1.0), (0.0, 1.0)),
            ((0.5, 0.5), (0.5, 0.5)),
        }

    def test_unique_mixed(self, no_pure_column_game):
        [profile] = exact_nash_oracle(no_pure_column_game)
        np.testing.assert_allclose(profile.x, [0.5, 0.5])

    def test_size_limit(self):
        with pytest.raises(InputError):
            exact_nash_oracle(BimatrixGame(np.zeros((6, 6)), np.zeros((6, 6))))

    @given(
        st.integers(min_value=2, max_value=3).flatmap(
            lambda n: st.tuples(
                st.lists(st.sampled_from([-1.0, -0.5, 0.0, 0.5, 1.0]), min_size=n * n, max_size=n * n),
                st.lists(st.sampled_from([-1.0, -0.5, 0.0, 0.5, 1.0]), min_size=n * n, max_size=n * n),
            )
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_every_oracle_profile_has_zero_regret(self, payoffs):
        n = int(math.isqrt(len(payoffs[0])))
        game = BimatrixGame(np.reshape(payoffs[0], (n, n)), np.reshape(payoffs[1], (n, n)))
        for profile in exact_nash_oracle(game):
            assert verify_eps_nash(game, profile).max_regret <= 1e-9


quarter_payoffs = st.sampled_from([-1.0, -0.5, 0.0, 0.5, 1.0])


@st.composite
def small_games(draw):
    n = draw(st.integers(min_value=2, max_value=3))
    A = draw(st.lists(quarter_payoffs, min_size=n * n, max_size=n * n))
    B = draw(st.lists(quarter_payoffs, min_size=n * n, max_size=n * n))
    return BimatrixGame(np.reshape(A, (n, n)), np.reshape(B, (n, n)))


class TestGameCorpus:
    @given(small_games())
    @settings(max_examples=40, deadline=None)
    def test_oracle_equilibria_zero_bilinear_objective(self, game):
        for profile in exact_nash_oracle(game):
            certificate = verify_eps_nash(game, profile)
            assert bp_objective(game, profile, certificate.pi1, certificate.pi2) == pytest.approx(0.0, abs=1e-9)

    @given(small_games(), st.sampled_from([0.1, 0.25]))
    @settings(max_examples=40, deadline=None)
    def test_returned_certificates_are_sound(self, game, eps):
        cfg = SolveConfig(eps=eps, max_multiset_size=2, workers=1)
        try:
            certificate = solve_sparse_nash(game, cfg)
        except ExhaustedError:
            return
        assert verify_eps_nash(game, certificate.profile).max_regret <= eps + 1e-7

    @given(small_games())
    @settings(max_examples=30, deadline=None)
    def test_planted_equilibrium_column_mix_is_accepted(self, game):
        equilibria = exact_equilibria(game)
        assume(equilibria)
        _, y = equilibria[0]
        size = int(np.lcm.reduce([value.denominator for value in y]))
        assume(size <= 60)
        planted = UniformCombination.of(
            index for index, value in enumerate(y) for _ in range(int(value * size))
        )
        cfg = SolveConfig(eps=0.25, max_multiset_size=1, workers=1)
        certificate = solve_sparse_nash(game, cfg, planted=[planted])
        assert certificate.is_eps_nash(0.25)
