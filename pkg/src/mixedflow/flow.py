"""Projected subgradient flows on products of simplices, with running time averages.

The flow ``u' + G(u) + N(u) ∋ 0`` (``G`` the stacked own-cost gradients,
``N`` the normal cone of the product of simplices) is integrated by one of
three schemes:

``projected-euler``
    catching-up step ``x+ = P(x - h G(x))``. The default.
``proximal-implicit``
    resolvent step ``x+ = P(x - h G(x+))`` by fixed-point iteration.
    Nonexpansive for monotone games; prefer it when ``h * L >= 0.5``.
``interior-rk4``
    classical RK4 on the tangential field while the state stays strictly
    inside the simplices, projected Euler otherwise. Meant for comparisons
    with closed-form trajectories.

The trajectory itself need not converge; the running (Cesàro) mean does
for monotone games, which is what ``integrate`` monitors.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _backend, _fallback
from .errors import InvalidInputError, SolverWarning
from .game import StrategyProfile, TensorGame, all_gradients, nash_gap, profile_arrays

SCHEMES = {
    "projected-euler": _fallback.EULER,
    "proximal-implicit": _fallback.IMPLICIT,
    "interior-rk4": _fallback.RK4,
}
INTERIOR_MARGIN = 1e-9
RENORM_TOL = 1e-9


@dataclass(frozen=True)
class FlowConfig:
    scheme: str = "projected-euler"
    h: float = 1e-2
    t_max: float = 100.0
    gap_tol: float = 1e-3
    record_every: int = 10
    inner_tol: float = 1e-12
    inner_max: int = 1000

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidInputError(
                f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}"
            )
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidInputError(f"step size must be positive, got {self.h}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise InvalidInputError(f"t_max must be positive, got {self.t_max}")
        if not self.gap_tol >= 0:
            raise InvalidInputError(f"gap_tol must be non-negative, got {self.gap_tol}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise InvalidInputError("record_every must be a positive integer")
        if not self.inner_tol > 0:
            raise InvalidInputError("inner_tol must be positive")
        if int(self.inner_max) != self.inner_max or self.inner_max < 1:
            raise InvalidInputError("inner_max must be a positive integer")

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_max / self.h - 1e-9))


@dataclass
class FlowResult:
    """Recorded trajectory of a flow run.

    ``states`` and ``cesaro`` are ``(K, D)`` arrays of concatenated player
    strategies; use :meth:`state` / :meth:`cesaro_profile` for profiles.
    """

    times: np.ndarray
    states: np.ndarray
    cesaro: np.ndarray
    gaps: np.ndarray
    stop_reason: str
    action_counts: tuple
    fallback_steps: int = 0
    nonconverged_steps: int = 0
    max_inner_residual: float = 0.0
    warnings: list = field(default_factory=list)

    def state(self, k: int = -1) -> StrategyProfile:
        return StrategyProfile.from_flat(self.states[k], self.action_counts)

    def cesaro_profile(self, k: int = -1) -> StrategyProfile:
        return StrategyProfile.from_flat(self.cesaro[k], self.action_counts)

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_gap(self) -> float:
        return float(self.gaps[-1])


def _offsets(action_counts) -> np.ndarray:
    return np.concatenate([[0], np.cumsum(action_counts)]).astype(np.intp)


def _tensor_field(game: TensorGame):
    cuts = np.cumsum(game.action_counts)[:-1]

    def g(x):
        return np.concatenate(all_gradients(game.costs, np.split(x, cuts)))

    return g


def step_projected_euler(game: TensorGame, x, h: float) -> StrategyProfile:
    flat = np.concatenate(profile_arrays(game, x))
    y = _fallback.euler_step(_tensor_field(game), flat, h, _offsets(game.action_counts))
    return StrategyProfile.from_flat(y, game.action_counts)


def step_proximal_implicit(game: TensorGame, x, h: float, inner_tol: float = 1e-12,
                           inner_max: int = 1000) -> StrategyProfile:
    """One resolvent step; warns with :class:`SolverWarning` if the inner loop stalls.

    For ``h * lipschitz_bound(game) < 1`` the inner map is a contraction.
    """
    flat = np.concatenate(profile_arrays(game, x))
    y, res, ok = _fallback.implicit_step(
        _tensor_field(game), flat, h, _offsets(game.action_counts), inner_tol, inner_max
    )
    out = StrategyProfile.from_flat(y, game.action_counts)
    if not ok:
        warnings.warn(
            SolverWarning(
                f"implicit step did not converge in {inner_max} iterations "
                f"(residual {res:.3g}); consider a smaller step",
                iterate=out, residual=res,
            ),
            stacklevel=2,
        )
    return out


def step_interior_rk4(game: TensorGame, x, h: float) -> StrategyProfile:
    """RK4 step of ``x_j' = -(G_j - mean G_j)``; projected Euler near the boundary."""
    flat = np.concatenate(profile_arrays(game, x))
    y, _ = _fallback.rk4_step(
        _tensor_field(game), flat, h, _offsets(game.action_counts), INTERIOR_MARGIN
    )
    return StrategyProfile.from_flat(y, game.action_counts)


def lipschitz_bound(game: TensorGame) -> float:
    """Crude bound ``(N - 1) * sum_j max|f_j|`` on the gradient map's Lipschitz modulus."""
    n = game.num_players
    return float((n - 1) * sum(np.abs(c).max() for c in game.costs))


def default_step(game: TensorGame) -> float:
    L = lipschitz_bound(game)
    return max(0.1 / L, 1e-6) if L > 0 else 0.1


def _renormalize(mean: np.ndarray, offsets) -> np.ndarray:
    out = mean.copy()
    for a, b in zip(offsets[:-1], offsets[1:]):
        s = out[a:b].sum()
        if abs(s - 1.0) > RENORM_TOL:
            raise InvalidInputError(f"time average drifted off the simplex (sum {s!r})")
        out[a:b] /= s
    return out


def _run(advance: Callable, x0: np.ndarray, action_counts, cfg: FlowConfig,
         gap_fn: Callable[[np.ndarray], float]) -> FlowResult:
    offsets = _offsets(action_counts)
    x = np.array(x0, dtype=float)
    integral = np.zeros_like(x)
    times, states, means, gaps = [0.0], [x.copy()], [x.copy()], [gap_fn(x)]
    stop = "gap_tol-met" if gaps[0] <= cfg.gap_tol else None
    n_total = cfg.n_steps
    done = 0
    fallbacks = nonconverged = 0
    max_res = 0.0
    while stop is None:
        chunk = min(cfg.record_every, n_total - done)
        fb, nc, res = advance(x, integral, chunk)
        fallbacks += fb
        nonconverged += nc
        max_res = max(max_res, res)
        done += chunk
        t = done * cfg.h
        mean = _renormalize(integral / t, offsets)
        times.append(t)
        states.append(x.copy())
        means.append(mean)
        gaps.append(gap_fn(mean))
        if gaps[-1] <= cfg.gap_tol:
            stop = "gap_tol-met"
        elif done >= n_total:
            stop = "t_max-reached"
    result = FlowResult(
        times=np.array(times), states=np.array(states), cesaro=np.array(means),
        gaps=np.array(gaps), stop_reason=stop, action_counts=tuple(action_counts),
        fallback_steps=fallbacks, nonconverged_steps=nonconverged,
        max_inner_residual=max_res,
    )
    if nonconverged:
        w = SolverWarning(
            f"{nonconverged} implicit steps hit inner_max={cfg.inner_max} "
            f"(worst residual {max_res:.3g})",
            iterate=result.state(), residual=max_res,
        )
        result.warnings.append(w)
        warnings.warn(w, stacklevel=3)
    return result


def integrate(game: TensorGame, x0, cfg: FlowConfig, backend: str | None = None) -> FlowResult:
    """Integrate the flow from ``x0`` until the running mean's Nash gap reaches
    ``cfg.gap_tol`` or ``cfg.t_max`` elapses.

    ``backend`` is ``"cython"``, ``"python"`` or ``None`` for the default
    chosen at import.
    """
    x0 = np.concatenate(profile_arrays(game, x0))
    costs = game.flat_costs()
    dims = np.asarray(game.action_counts, dtype=np.intp)
    scheme = SCHEMES[cfg.scheme]

    def advance(x, integral, n):
        return _backend.advance_tensor(
            costs, dims, scheme, x, integral, cfg.h, n, cfg.inner_tol,
            cfg.inner_max, INTERIOR_MARGIN, backend=backend,
        )

    cuts = np.cumsum(game.action_counts)[:-1]

    def gap(flat):
        return nash_gap(game, np.split(flat, cuts))

    return _run(advance, x0, game.action_counts, cfg, gap)


def integrate_field(field_fn: Callable[[np.ndarray], np.ndarray], x0: np.ndarray,
                    action_counts: Sequence[int], cfg: FlowConfig,
                    gap_fn: Callable[[np.ndarray], float]) -> FlowResult:
    """Same contract as :func:`integrate` for an arbitrary field on flat states."""
    offsets = _offsets(action_counts)
    scheme = SCHEMES[cfg.scheme]

    def advance(x, integral, n):
        return _fallback.advance(
            field_fn, scheme, x, integral, offsets, cfg.h, n, cfg.inner_tol,
            cfg.inner_max, INTERIOR_MARGIN,
        )

    return _run(advance, np.asarray(x0, dtype=float), action_counts, cfg, gap_fn)


def cesaro_mean(times, states, t: float):
    """Trapezoidal time average of a recorded trajectory over ``[0, t]``.

    ``states`` may be a sequence of :class:`StrategyProfile` (a profile is
    returned, renormalised per player) or a plain array whose first axis
    runs over ``times`` (an array is returned unchanged in scale). Between
    grid points the trajectory is interpolated linearly.
    """
    times = np.asarray(times, dtype=float)
    profiles = len(states) > 0 and isinstance(states[0], StrategyProfile)
    if profiles:
        counts = states[0].action_counts
        values = np.array([s.flat() for s in states])
    else:
        values = np.asarray(states, dtype=float)
    if values.shape[0] != times.shape[0]:
        raise InvalidInputError("times and states differ in length")
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise InvalidInputError("times must start at 0 and increase strictly")
    if not (0 < t <= times[-1] * (1 + 1e-12)):
        raise InvalidInputError(f"t={t} lies outside the recorded grid (0, {times[-1]}]")
    t = min(t, times[-1])
    k = int(np.searchsorted(times, t, side="left"))
    total = 0.5 * ((times[1:k] - times[:k - 1])[:, None] * (values[1:k] + values[:k - 1])
                   .reshape(k - 1, -1)).sum(axis=0) if k > 1 else 0.0
    a, b = times[k - 1], times[k]
    va = values[k - 1].reshape(-1)
    vt = va + (values[k].reshape(-1) - va) * (t - a) / (b - a)
    total = total + 0.5 * (t - a) * (va + vt)
    mean = (total / t).reshape(values.shape[1:])
    if profiles:
        return StrategyProfile.from_flat(_renormalize(mean, _offsets(counts)), counts)
    return mean
