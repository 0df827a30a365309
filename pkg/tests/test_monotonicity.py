import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import coordination_game, random_zero_sum
from mixedflow.game import TensorGame
from mixedflow.meanfield import Congestion, MeanFieldCost
from mixedflow.monotonicity import (
    mf_monotonicity_check, pure_margin, pure_monotonicity_check,
    variational_margin, variational_monotonicity_check,
)


def brute_force_margins(game):
    """Every pair's margin, summed over players by explicit loops."""
    joint = list(itertools.product(*(range(m) for m in game.action_counts)))
    out = {}
    for s in joint:
        for t in joint:
            total = 0.0
            for j, f in enumerate(game.costs):
                sj_t = t[:j] + (s[j],) + t[j + 1:]
                tj_s = s[:j] + (t[j],) + s[j + 1:]
                total += f[s] + f[t] - f[sj_t] - f[tj_s]
            out[(s, t)] = total
    return out


def test_cycling_game_exhaustive(cycling):
    rep = pure_monotonicity_check(cycling)
    assert rep.verdict == "certified-exhaustive"
    assert rep.worst_margin == 0.0
    assert rep.pairs_tested == 16


def test_coordination_violated():
    game = coordination_game()
    rep = pure_monotonicity_check(game)
    margins = brute_force_margins(game)
    assert rep.verdict == "violated"
    assert rep.worst_margin == pytest.approx(min(margins.values()), abs=1e-12)
    # summed over both players: -2 each
    assert rep.worst_margin == pytest.approx(-4.0, abs=1e-12)
    assert rep.witness == ((0, 0), (1, 1))


def test_witness_reproduces_margin():
    rng = np.random.default_rng(4)
    game = TensorGame(tuple(rng.normal(size=(2, 3, 2)) for _ in range(3)))
    rep = pure_monotonicity_check(game)
    assert pure_margin(game, *rep.witness) == pytest.approx(rep.worst_margin, abs=1e-12)
    assert rep.worst_margin == pytest.approx(min(brute_force_margins(game).values()), abs=1e-12)


def test_single_player_certified():
    rep = pure_monotonicity_check(TensorGame((np.array([1.0, -3.0, 2.0]),)))
    assert rep.passed and rep.worst_margin == 0.0


def test_sampled_when_above_cap():
    rng = np.random.default_rng(0)
    game = TensorGame(tuple(rng.normal(size=(3, 3, 3)) for _ in range(3)))
    rep = pure_monotonicity_check(game, cap=500, seed=11)
    assert rep.verdict in ("certified-sampled", "violated")
    assert rep.pairs_tested == 500 and rep.seed == 11
    again = pure_monotonicity_check(game, cap=500, seed=11)
    assert again == rep


def test_verdict_tracks_tolerance():
    game = coordination_game()
    assert pure_monotonicity_check(game, tol=5.0).verdict == "certified-exhaustive"
    assert pure_monotonicity_check(game, tol=3.9).verdict == "violated"


def test_variational_cycling_game(cycling):
    rep = variational_monotonicity_check(cycling, n_samples=2000, seed=5)
    assert rep.verdict == "certified-sampled"
    assert rep.worst_margin >= -1e-12


def test_variational_coordination():
    rep = variational_monotonicity_check(coordination_game(), n_samples=100, seed=0)
    assert rep.verdict == "violated"
    x, y = rep.witness
    assert variational_margin(coordination_game(), x, y) == pytest.approx(rep.worst_margin, abs=1e-12)


def test_variational_margin_zero_on_diagonal(cycling):
    x = [np.array([0.3, 0.7]), np.array([0.9, 0.1])]
    assert variational_margin(cycling, x, x) == 0.0


def test_summary_mentions_sampling(cycling):
    text = variational_monotonicity_check(cycling, n_samples=10).summary()
    assert "evidence" in text


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(2, 4))
def test_zero_sum_always_monotone(seed, m, n):
    game = random_zero_sum(np.random.default_rng(seed), m, n)
    assert pure_monotonicity_check(game).worst_margin >= -1e-12
    assert variational_monotonicity_check(game, n_samples=200, seed=seed).worst_margin >= -1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exhaustive_certificate_implies_variational(seed):
    # potential-free monotone construction: zero-sum part plus own-action-only costs
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1, 1, (3, 3))
    own1, own2 = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
    game = TensorGame((a + own1[:, None], -a + own2[None, :]))
    pure = pure_monotonicity_check(game)
    if pure.verdict == "certified-exhaustive":
        rep = variational_monotonicity_check(game, n_samples=300, tol=1e-10, seed=seed)
        assert rep.verdict != "violated"


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reports_deterministic(seed):
    game = random_zero_sum(np.random.default_rng(seed), 3)
    a = variational_monotonicity_check(game, n_samples=50, seed=seed)
    b = variational_monotonicity_check(game, n_samples=50, seed=seed)
    assert a.worst_margin == b.worst_margin


class TestMeanField:
    def test_phi_only(self):
        rep = mf_monotonicity_check(MeanFieldCost([0.0, 1.0, 2.0]), n_samples=500)
        assert rep.verdict == "certified-sampled" and rep.worst_margin == 0.0

    def test_identity_kernel_margin_is_squared_distance(self):
        rep = mf_monotonicity_check(MeanFieldCost(np.zeros(3), np.eye(3)), n_samples=500)
        mu, nu = rep.witness
        assert rep.verdict == "certified-sampled"
        assert rep.worst_margin == pytest.approx(((mu - nu) ** 2).sum(), abs=1e-14)

    def test_identity_congestion(self):
        rep = mf_monotonicity_check(MeanFieldCost(np.zeros(3), congestion=Congestion("identity")),
                                    n_samples=500)
        mu, nu = rep.witness
        assert rep.worst_margin == pytest.approx(((mu - nu) ** 2).sum(), abs=1e-14)

    def test_negative_kernel_violated(self):
        rep = mf_monotonicity_check(MeanFieldCost(np.zeros(2), -np.eye(2)), n_samples=100)
        assert rep.verdict == "violated"

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_psd_kernels_pass(self, seed):
        rng = np.random.default_rng(seed)
        b = rng.normal(size=(4, 4))
        k = b @ b.T
        assert np.linalg.eigvalsh(k).min() >= -1e-10
        rep = mf_monotonicity_check(MeanFieldCost(rng.normal(size=4), k, Congestion("log1p")),
                                    n_samples=300, seed=seed)
        assert rep.worst_margin >= -1e-10
