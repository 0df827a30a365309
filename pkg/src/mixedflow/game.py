"""Finite N-player games stored as cost tensors, plus simplex geometry.

Players minimise cost. Action indices are 0-based throughout the Python
API; the CLI prints 1-based labels.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

SUM_DRIFT_TOL = 1e-9
SUM_EXACT_TOL = 1e-12
NEG_ENTRY_TOL = 1e-12
ZERO_SUM_TOL = 1e-12


def simplex_project(v) -> "MixedStrategy":
    """Euclidean projection of ``v`` onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError("simplex_project expects a non-empty vector")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("simplex_project received non-finite entries")
    if np.all(v >= 0) and abs(v.sum() - 1.0) <= SUM_EXACT_TOL:
        # already feasible; returning it untouched makes projection idempotent
        return MixedStrategy(v)
    return MixedStrategy(project_vector(v))


def project_vector(v: np.ndarray) -> np.ndarray:
    """Sort-and-threshold projection onto the simplex, returned as an array.

    There is a threshold ``tau`` with ``out = max(v - tau, 0)`` summing to one.
    The stable sort keeps equal entries in index order so the result is
    reproducible bit for bit.
    """
    m = v.shape[0]
    order = np.argsort(-v, kind="stable")
    u = v[order]
    css = np.cumsum(u)
    k = np.arange(1, m + 1)
    positive = u * k > css - 1.0
    rho = int(np.nonzero(positive)[0][-1])
    tau = (css[rho] - 1.0) / (rho + 1)
    out = np.maximum(v - tau, 0.0)
    return out / out.sum()


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """A point of the probability simplex.

    Sums within 1e-9 of one are silently renormalised (sums within 1e-12
    are kept as given); entries down to
    -1e-12 are treated as rounding and clamped. Anything worse is rejected.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise InvalidInputError("a mixed strategy needs at least one action")
        if not np.all(np.isfinite(p)):
            raise InvalidInputError("mixed strategy has non-finite entries")
        if np.any(p < -NEG_ENTRY_TOL):
            raise InvalidInputError(f"negative probability {p.min():.3g}")
        total = p.sum()
        if total <= 0:
            raise InvalidInputError("probabilities sum to a non-positive value")
        if abs(total - 1.0) > SUM_DRIFT_TOL:
            raise InvalidInputError(f"probabilities sum to {total!r}, not 1")
        p = np.maximum(p, 0.0)
        if abs(p.sum() - 1.0) > SUM_EXACT_TOL:
            p /= p.sum()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"MixedStrategy({np.array2string(self.probs, precision=6)})"

    @classmethod
    def pure(cls, m: int, action: int) -> "MixedStrategy":
        e = np.zeros(m)
        e[action] = 1.0
        return cls(e)

    @classmethod
    def uniform(cls, m: int) -> "MixedStrategy":
        return cls(np.full(m, 1.0 / m))


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """One mixed strategy per player, player ``i`` at index ``i``."""

    strategies: tuple

    def __post_init__(self):
        strategies = tuple(
            s if isinstance(s, MixedStrategy) else MixedStrategy(s)
            for s in self.strategies
        )
        if not strategies:
            raise InvalidInputError("a profile needs at least one player")
        object.__setattr__(self, "strategies", strategies)

    @classmethod
    def from_arrays(cls, arrays) -> "StrategyProfile":
        return cls(tuple(arrays))

    @classmethod
    def from_flat(cls, flat, action_counts) -> "StrategyProfile":
        flat = np.asarray(flat, dtype=float)
        cuts = np.cumsum(action_counts)[:-1]
        return cls(tuple(np.split(flat, cuts)))

    def __len__(self):
        return len(self.strategies)

    def __getitem__(self, i) -> MixedStrategy:
        return self.strategies[i]

    def __iter__(self):
        return iter(self.strategies)

    def __eq__(self, other):
        if not isinstance(other, StrategyProfile):
            return NotImplemented
        return len(self) == len(other) and all(
            a == b for a, b in zip(self.strategies, other.strategies)
        )

    def __repr__(self):
        inner = ", ".join(np.array2string(s.probs, precision=6) for s in self)
        return f"StrategyProfile({inner})"

    @property
    def arrays(self) -> list:
        return [s.probs for s in self.strategies]

    @property
    def action_counts(self) -> tuple:
        return tuple(len(s) for s in self.strategies)

    def flat(self) -> np.ndarray:
        return np.concatenate(self.arrays)

    def replace(self, j: int, strategy) -> "StrategyProfile":
        items = list(self.strategies)
        items[j] = strategy
        return StrategyProfile(tuple(items))


@dataclass(frozen=True, eq=False)
class TensorGame:
    """N-player finite game; ``costs[j][s_1, ..., s_N]`` is player j's cost."""

    costs: tuple

    def __post_init__(self):
        costs = tuple(np.array(c, dtype=float) for c in self.costs)
        if not costs:
            raise InvalidInputError("a game needs at least one player")
        n = len(costs)
        shape = costs[0].shape
        if len(shape) != n:
            raise InvalidInputError(
                f"cost tensors must have one axis per player ({n}), got shape {shape}"
            )
        if any(m < 1 for m in shape):
            raise InvalidInputError("every player needs at least one action")
        for j, c in enumerate(costs):
            if c.shape != shape:
                raise InvalidInputError(
                    f"cost tensor {j} has shape {c.shape}, expected {shape}"
                )
            if not np.all(np.isfinite(c)):
                raise InvalidInputError(f"cost tensor {j} has non-finite entries")
            c.flags.writeable = False
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_flat(cls, action_counts: Sequence[int], flat_costs) -> "TensorGame":
        """Build from row-major flat arrays (first player's action slowest)."""
        action_counts = tuple(int(m) for m in action_counts)
        if len(flat_costs) != len(action_counts):
            raise InvalidInputError(
                f"{len(action_counts)} players but {len(flat_costs)} cost arrays"
            )
        size = int(np.prod(action_counts))
        tensors = []
        for j, arr in enumerate(flat_costs):
            arr = np.asarray(arr, dtype=float).reshape(-1)
            if arr.size != size:
                raise InvalidInputError(
                    f"cost array {j} has {arr.size} entries, expected {size} "
                    f"for actions {list(action_counts)}"
                )
            tensors.append(arr.reshape(action_counts))
        return cls(tuple(tensors))

    @classmethod
    def two_player(cls, a, b=None) -> "TensorGame":
        """Bimatrix game; ``b`` defaults to ``-a`` (zero-sum)."""
        a = np.asarray(a, dtype=float)
        return cls((a, -a if b is None else np.asarray(b, dtype=float)))

    @property
    def num_players(self) -> int:
        return len(self.costs)

    @property
    def action_counts(self) -> tuple:
        return self.costs[0].shape

    @property
    def zero_sum(self) -> bool:
        return bool(np.all(np.abs(sum(self.costs)) <= ZERO_SUM_TOL))

    def flat_costs(self) -> np.ndarray:
        """``(N, prod m_i)`` array of the row-major flattened tensors."""
        return np.ascontiguousarray(np.stack([c.reshape(-1) for c in self.costs]))

    def uniform_profile(self) -> StrategyProfile:
        return StrategyProfile(tuple(MixedStrategy.uniform(m) for m in self.action_counts))


def profile_arrays(game: TensorGame, x) -> list:
    """Validate ``x`` against ``game`` and return per-player arrays."""
    arrays = x.arrays if isinstance(x, StrategyProfile) else [np.asarray(a, float) for a in x]
    if len(arrays) != game.num_players:
        raise InvalidInputError(
            f"profile has {len(arrays)} strategies, game has {game.num_players} players"
        )
    for i, (a, m) in enumerate(zip(arrays, game.action_counts)):
        if a.shape != (m,):
            raise InvalidInputError(f"player {i} strategy has shape {a.shape}, expected ({m},)")
    return arrays


def _check_player(game: TensorGame, j: int):
    if not 0 <= j < game.num_players:
        raise InvalidInputError(f"player index {j} out of range for {game.num_players} players")


def contract_gradient(cost: np.ndarray, arrays: Sequence[np.ndarray], j: int) -> np.ndarray:
    """Contract every axis of ``cost`` except ``j`` against the strategies."""
    t = np.moveaxis(cost, j, 0)
    for i in reversed(range(len(arrays))):
        if i != j:
            t = t @ arrays[i]
    return t


def all_gradients(costs: Sequence[np.ndarray], arrays: Sequence[np.ndarray]) -> list:
    return [contract_gradient(c, arrays, j) for j, c in enumerate(costs)]


def expected_cost(game: TensorGame, x, j: int) -> float:
    """Player ``j``'s expected cost under the product distribution ``x``."""
    _check_player(game, j)
    arrays = profile_arrays(game, x)
    t = game.costs[j]
    for a in reversed(arrays):
        t = t @ a
    return float(t)


def own_gradient(game: TensorGame, x, j: int) -> np.ndarray:
    """Cost of each pure action of player ``j`` against ``x_{-j}``.

    The expected cost is linear in the player's own strategy with exactly
    this coefficient vector.
    """
    _check_player(game, j)
    return contract_gradient(game.costs[j], profile_arrays(game, x), j)


def best_response(game: TensorGame, x, j: int) -> tuple:
    """``(value, action)`` of player ``j``'s cheapest pure reply; lowest index wins ties."""
    g = own_gradient(game, x, j)
    k = int(np.argmin(g))
    return float(g[k]), k


def nash_gap(game: TensorGame, x) -> float:
    """Sum over players of expected cost minus best-response cost."""
    arrays = profile_arrays(game, x)
    grads = all_gradients(game.costs, arrays)
    return float(sum(a @ g - g.min() for a, g in zip(arrays, grads)))
