import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import expanded_cost, games, random_profile
from mixedflow import InvalidInputError
from mixedflow.game import (
    MixedStrategy, StrategyProfile, TensorGame, best_response, expected_cost,
    nash_gap, own_gradient, simplex_project,
)

finite_vectors = arrays(np.float64, st.integers(1, 8),
                        elements=st.floats(-50, 50, allow_nan=False, allow_infinity=False))


def grid_projection(v, step=1e-4):
    """Closest point of the 2-simplex segment, by exhaustive search."""
    p = np.arange(0.0, 1.0 + step / 2, step)
    pts = np.stack([p, 1.0 - p], axis=1)
    return pts[np.argmin(((pts - v) ** 2).sum(axis=1))]


class TestProjection:
    def test_fixed_point(self):
        np.testing.assert_array_equal(simplex_project([0.5, 0.5]).probs, [0.5, 0.5])

    def test_outside_point_matches_grid_search(self):
        np.testing.assert_allclose(simplex_project([2.0, 0.0]).probs, grid_projection([2.0, 0.0]))
        np.testing.assert_allclose(simplex_project([2.0, 0.0]).probs, [1.0, 0.0])

    def test_barycenter(self):
        np.testing.assert_allclose(simplex_project([0.4, 0.4, 0.4]).probs, [1 / 3] * 3, atol=1e-15)

    @pytest.mark.parametrize("v", [[0.3, -0.9], [1.7, 1.2], [-3.0, -2.5], [0.0, 0.0]])
    def test_grid_oracle(self, v):
        np.testing.assert_allclose(simplex_project(v).probs, grid_projection(np.array(v)), atol=1e-4)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            simplex_project([np.nan, 1.0])
        with pytest.raises(InvalidInputError):
            simplex_project([np.inf, 0.0])

    def test_ties_are_deterministic(self):
        a = simplex_project([1.0, 1.0, 1.0, 0.2]).probs
        b = simplex_project([1.0, 1.0, 1.0, 0.2]).probs
        assert a.tobytes() == b.tobytes()

    @given(finite_vectors)
    def test_output_on_simplex(self, v):
        p = simplex_project(v).probs
        assert np.all(p >= 0)
        assert abs(p.sum() - 1.0) <= 1e-12

    @given(finite_vectors)
    def test_idempotent(self, v):
        p = simplex_project(v)
        np.testing.assert_array_equal(simplex_project(p.probs).probs, p.probs)

    @given(st.integers(1, 8).flatmap(lambda m: st.tuples(
        arrays(np.float64, m, elements=st.floats(-20, 20)),
        arrays(np.float64, m, elements=st.floats(-20, 20)))))
    def test_nonexpansive(self, pair):
        v, w = pair
        d = np.linalg.norm(simplex_project(v).probs - simplex_project(w).probs)
        assert d <= np.linalg.norm(v - w) + 1e-12

    @given(arrays(np.float64, st.integers(1, 6), elements=st.floats(-5, 5)))
    def test_variational_characterisation(self, v):
        # (v - P v) . (z - P v) <= 0 for every vertex z
        p = simplex_project(v).probs
        for k in range(v.size):
            z = np.eye(v.size)[k]
            assert (v - p) @ (z - p) <= 1e-9


class TestMixedStrategy:
    def test_small_drift_is_renormalised(self):
        s = MixedStrategy([0.5, 0.5 + 5e-10])
        assert abs(s.probs.sum() - 1.0) <= 1e-15

    def test_large_drift_rejected(self):
        with pytest.raises(InvalidInputError):
            MixedStrategy([0.5, 0.6])

    def test_negative_entry_rejected(self):
        with pytest.raises(InvalidInputError):
            MixedStrategy([1.0 + 1e-11, -1e-11])

    def test_tiny_negative_clamped(self):
        s = MixedStrategy([1.0, -1e-13])
        assert s.probs[1] == 0.0

    def test_pure_and_uniform(self):
        np.testing.assert_array_equal(MixedStrategy.pure(3, 1).probs, [0, 1, 0])
        np.testing.assert_allclose(MixedStrategy.uniform(4).probs, [0.25] * 4)


class TestTensorGame:
    def test_from_flat_row_major(self):
        g = TensorGame.from_flat([2, 3], [np.arange(6), -np.arange(6)])
        assert g.costs[0][1, 0] == 3.0
        assert g.zero_sum

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            TensorGame.from_flat([2, 2], [[1, 2, 3], [1, 2, 3, 4]])

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            TensorGame.two_player([[np.nan, 0], [0, 0]])

    def test_not_zero_sum(self):
        assert not TensorGame.two_player(np.eye(2), np.eye(2)).zero_sum

    def test_profile_length_checked(self, cycling):
        with pytest.raises(InvalidInputError):
            expected_cost(cycling, [np.array([1.0, 0.0])], 0)
        with pytest.raises(InvalidInputError):
            nash_gap(cycling, [np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0])])


class TestCyclingGameValues:
    def test_expected_cost_pure(self, cycling):
        assert expected_cost(cycling, [np.array([1.0, 0.0]), np.array([1.0, 0.0])], 0) == 3.0

    def test_expected_cost_equilibrium(self, cycling):
        x = StrategyProfile(((0.5, 0.5), (2 / 3, 1 / 3)))
        assert expected_cost(cycling, x, 0) == pytest.approx(2.0, abs=1e-14)

    def test_constant_game(self):
        g = TensorGame((np.full((2, 3), 1.5), np.full((2, 3), -0.5)))
        x = [np.array([0.2, 0.8]), np.array([0.1, 0.3, 0.6])]
        assert expected_cost(g, x, 0) == pytest.approx(1.5, abs=1e-14)
        np.testing.assert_allclose(own_gradient(g, x, 1), [-0.5] * 3)

    def test_gradients(self, cycling):
        x = [np.array([0.5, 0.5]), np.array([2 / 3, 1 / 3])]
        np.testing.assert_allclose(own_gradient(cycling, x, 0), [2.0, 2.0], atol=1e-14)
        np.testing.assert_allclose(own_gradient(cycling, x, 1), [-2.0, -2.0], atol=1e-14)

    @pytest.mark.parametrize("x, gap", [
        (((0.5, 0.5), (2 / 3, 1 / 3)), 0.0),
        (((1.0, 0.0), (1.0, 0.0)), 2.0),
        (((0.5, 0.5), (0.5, 0.5)), 0.5),
    ])
    def test_nash_gap(self, cycling, x, gap):
        assert nash_gap(cycling, StrategyProfile(x)) == pytest.approx(gap, abs=1e-14)

    def test_best_response(self, cycling):
        assert best_response(cycling, [np.array([0.3, 0.7]), np.array([1.0, 0.0])], 0) == (1.0, 1)
        value, action = best_response(cycling, [np.array([0.3, 0.7]), np.array([2 / 3, 1 / 3])], 0)
        assert value == pytest.approx(2.0) and action == 0

    def test_single_action(self):
        g = TensorGame((np.array([7.0]),))
        assert best_response(g, [np.array([1.0])], 0) == (7.0, 0)
        assert nash_gap(g, [np.array([1.0])]) == 0.0


@settings(max_examples=60, deadline=None)
@given(games(), st.integers(0, 2**32 - 1))
def test_expected_cost_matches_expansion(game, seed):
    x = random_profile(np.random.default_rng(seed), game.action_counts)
    for j in range(game.num_players):
        assert expected_cost(game, x, j) == pytest.approx(expanded_cost(game, x, j), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(games(), st.integers(0, 2**32 - 1))
def test_gradient_is_exact_linearisation(game, seed):
    rng = np.random.default_rng(seed)
    x = random_profile(rng, game.action_counts)
    for j, m in enumerate(game.action_counts):
        y = rng.dirichlet(np.ones(m))
        moved = list(x)
        moved[j] = y
        assert own_gradient(game, x, j) @ y == pytest.approx(expected_cost(game, moved, j), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(games(), st.integers(0, 2**32 - 1))
def test_gap_nonnegative(game, seed):
    x = random_profile(np.random.default_rng(seed), game.action_counts)
    assert nash_gap(game, x) >= -1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gap_at_brute_force_equilibrium(seed):
    # 2x2 games: find an equilibrium by enumerating supports, then check the gap
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-1, 1, (2, 2, 2))
    game = TensorGame((a, b))
    candidates = [(np.eye(2)[i], np.eye(2)[k]) for i in range(2) for k in range(2)]
    # interior: each player makes the other indifferent
    dq = a[0, 0] - a[0, 1] - a[1, 0] + a[1, 1]
    dp = b[0, 0] - b[0, 1] - b[1, 0] + b[1, 1]
    if abs(dq) > 1e-9 and abs(dp) > 1e-9:
        q = (a[1, 1] - a[0, 1]) / dq
        p = (b[1, 1] - b[1, 0]) / dp
        if 0 <= p <= 1 and 0 <= q <= 1:
            candidates.append((np.array([p, 1 - p]), np.array([q, 1 - q])))
    gaps = [nash_gap(game, list(c)) for c in candidates]
    assert min(gaps) <= 1e-8
