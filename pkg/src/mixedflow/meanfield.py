"""Finite-state static mean field games and symmetric games.

A mean field cost on ``m`` states is ``g_s(mu) = phi[s] + (K mu)[s] + psi(mu[s])``.
The congestion term uses the counting measure as reference, so the density
of ``mu`` is just ``mu`` itself and the congestion equilibrium is uniform.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .flow import FlowConfig, FlowResult, integrate_field
from .game import MixedStrategy, StrategyProfile, TensorGame, contract_gradient

CONGESTION_NAMES = ("none", "identity", "power", "log1p")


@dataclass(frozen=True)
class Congestion:
    """Increasing function applied entrywise to the state distribution."""

    name: str = "none"
    p: float = 1.0

    def __post_init__(self):
        if self.name not in CONGESTION_NAMES:
            raise InvalidInputError(
                f"unknown congestion {self.name!r}; choose from {CONGESTION_NAMES}"
            )
        if self.name == "power" and not self.p > 0:
            raise InvalidInputError(f"power congestion needs p > 0, got {self.p}")

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.name == "none":
            return np.zeros_like(rho)
        if self.name == "identity":
            return rho.copy()
        if self.name == "power":
            return np.power(np.maximum(rho, 0.0), self.p)
        return np.log1p(rho)


@dataclass(frozen=True, eq=False)
class MeanFieldCost:
    phi: np.ndarray
    kernel: np.ndarray | None = None
    congestion: Congestion = Congestion()
    monotone_by_construction: bool = False

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float).reshape(-1)
        m = phi.size
        if m < 1:
            raise InvalidInputError("a mean field cost needs at least one state")
        kernel = np.zeros((m, m)) if self.kernel is None else np.array(self.kernel, dtype=float)
        if kernel.size == m * m:
            kernel = kernel.reshape(m, m)
        if kernel.shape != (m, m):
            raise InvalidInputError(f"kernel has shape {kernel.shape}, expected ({m}, {m})")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(kernel))):
            raise InvalidInputError("mean field cost has non-finite entries")
        if self.monotone_by_construction and np.abs(kernel - kernel.T).max() > 1e-12:
            raise InvalidInputError("kernel must be symmetric for a monotone-by-construction cost")
        grid = self.congestion(np.linspace(0.0, 1.0, 1001))
        if not np.all(np.isfinite(grid)) or np.any(np.diff(grid) < 0):
            raise InvalidInputError("congestion function is not nondecreasing on [0, 1]")
        phi.flags.writeable = False
        kernel.flags.writeable = False
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "kernel", kernel)

    @property
    def m(self) -> int:
        return self.phi.size

    def field(self, mu: np.ndarray) -> np.ndarray:
        return self.phi + self.kernel @ mu + self.congestion(mu)


def _mu_array(cost: MeanFieldCost, mu) -> np.ndarray:
    arr = mu.probs if isinstance(mu, MixedStrategy) else np.asarray(mu, dtype=float)
    if arr.shape != (cost.m,):
        raise InvalidInputError(f"distribution has shape {arr.shape}, expected ({cost.m},)")
    return arr


def mf_cost_vector(cost: MeanFieldCost, mu) -> np.ndarray:
    return cost.field(_mu_array(cost, mu))


def mf_exploitability(cost: MeanFieldCost, mu) -> float:
    """``mu . g(mu) - min_s g_s(mu)``; zero exactly at mean field equilibria."""
    arr = _mu_array(cost, mu)
    g = cost.field(arr)
    return float(arr @ g - g.min())


def mf_integrate(cost: MeanFieldCost, mu0, cfg: FlowConfig) -> FlowResult:
    """Single-population flow driven by ``g``; gaps are mean field exploitabilities."""
    x0 = _mu_array(cost, mu0)
    return integrate_field(
        cost.field, x0, (cost.m,), cfg, lambda mu: mf_exploitability(cost, mu)
    )


def _symmetry_violation_exhaustive(game: TensorGame) -> float:
    # F_i(mu,..,nu@i,..,mu) is a polynomial whose coefficients are sums of f_i
    # over joint actions sharing the deviator's action and the others' multiset.
    coeffs = []
    for i, cost in enumerate(game.costs):
        c = defaultdict(float)
        for s in itertools.product(*(range(m) for m in game.action_counts)):
            others = tuple(sorted(s[:i] + s[i + 1:]))
            c[(s[i], others)] += cost[s]
        coeffs.append(c)
    keys = set().union(*coeffs)
    return max(
        (abs(c.get(k, 0.0) - coeffs[0].get(k, 0.0)) for c in coeffs[1:] for k in keys),
        default=0.0,
    )


def _deviation_cost(game: TensorGame, i: int, mu: np.ndarray, nu: np.ndarray) -> float:
    arrays = [mu] * game.num_players
    return float(nu @ contract_gradient(game.costs[i], arrays, i))


def _symmetry_violation_sampled(game: TensorGame, n: int, seed: int) -> float:
    rng = np.random.Generator(np.random.PCG64(seed))
    m, big_n = game.action_counts[0], game.num_players
    worst = 0.0
    for _ in range(n):
        mu, nu = rng.dirichlet(np.ones(m), size=2)
        i, j = rng.integers(0, big_n, size=2)
        worst = max(worst, abs(_deviation_cost(game, i, mu, nu) - _deviation_cost(game, j, mu, nu)))
    return worst


@dataclass(frozen=True, eq=False)
class SymmetricGameView:
    """A tensor game whose players are interchangeable.

    Symmetry is verified exactly for games with at most 10^4 joint actions
    and on 100 random ``(mu, nu, i, j)`` tuples beyond that.
    """

    base: TensorGame
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        counts = self.base.action_counts
        if len(set(counts)) != 1:
            raise InvalidInputError(f"symmetric games need equal action counts, got {counts}")
        if np.prod(counts) <= 10**4:
            violation = _symmetry_violation_exhaustive(self.base)
        else:
            violation = _symmetry_violation_sampled(self.base, 100, self.seed)
        if violation > self.tol:
            raise InvalidInputError(f"game is not symmetric (violation {violation:.3g})")

    @property
    def m(self) -> int:
        return self.base.action_counts[0]

    def field(self, mu: np.ndarray) -> np.ndarray:
        return contract_gradient(self.base.costs[0], [mu] * self.base.num_players, 0)

    def exploitability(self, mu) -> float:
        mu = mu.probs if isinstance(mu, MixedStrategy) else np.asarray(mu, dtype=float)
        g = self.field(mu)
        return float(mu @ g - g.min())

    def profile(self, mu) -> StrategyProfile:
        return StrategyProfile(tuple([mu] * self.base.num_players))


def symmetric_flow(view: SymmetricGameView, mu0, cfg: FlowConfig) -> FlowResult:
    x0 = mu0.probs if isinstance(mu0, MixedStrategy) else np.asarray(mu0, dtype=float)
    if x0.shape != (view.m,):
        raise InvalidInputError(f"distribution has shape {x0.shape}, expected ({view.m},)")
    return integrate_field(view.field, x0, (view.m,), cfg, view.exploitability)
