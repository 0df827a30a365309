import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from mixedflow.game import TensorGame
from mixedflow.oracle import appendix_game


@pytest.fixture
def cycling():
    return appendix_game()


def coordination_game():
    c = np.array([[-1.0, 0.0], [0.0, -1.0]])
    return TensorGame((c, c))


def random_zero_sum(rng, m, n=None):
    a = rng.uniform(-1.0, 1.0, size=(m, n or m))
    return TensorGame.two_player(a)


def expanded_cost(game, arrays, j):
    """Literal sum over joint actions of f_j(s) * prod_i x_i(s_i)."""
    total = 0.0
    for s in itertools.product(*(range(m) for m in game.action_counts)):
        w = 1.0
        for i, si in enumerate(s):
            w *= arrays[i][si]
        total += game.costs[j][s] * w
    return total


@st.composite
def games(draw, max_players=3, max_actions=3):
    n = draw(st.integers(1, max_players))
    counts = tuple(draw(st.lists(st.integers(1, max_actions), min_size=n, max_size=n)))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return TensorGame(tuple(rng.uniform(-2, 2, size=counts) for _ in range(n)))


def random_profile(rng, counts):
    return [rng.dirichlet(np.ones(m)) for m in counts]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
