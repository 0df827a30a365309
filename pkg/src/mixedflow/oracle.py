"""Closed-form ground truth for a 2x2 zero-sum game with a cycling flow.

Player 1's cost is ``3 x11 x21 + x12 x21 + 4 x12 x22``; player 2 pays the
negative. Writing ``v1 = x11`` and ``v2 = x21``, interior trajectories of
the flow solve ``v1' = 2 - 3 v2``, ``v2' = 3 v1 - 3/2`` and circle the
unique equilibrium ``(1/2, 2/3)`` counterclockwise at angular rate 3.
Circles of radius at most 1/3 stay inside the unit square; larger ones
hit the boundary, slide along it and end up on the radius-1/3 circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError
from .game import StrategyProfile, TensorGame

CENTER = (0.5, 2.0 / 3.0)
RATE = 3.0
EQUILIBRIUM = StrategyProfile(((0.5, 0.5), (2.0 / 3.0, 1.0 / 3.0)))


@dataclass(frozen=True)
class ReducedState:
    """``(x11, x21)``: first-action probabilities of both players."""

    v1: float
    v2: float

    def __post_init__(self):
        for name in ("v1", "v2"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise InvalidInputError(f"{name}={v} outside [0, 1]")

    def radius(self) -> float:
        return math.hypot(self.v1 - CENTER[0], self.v2 - CENTER[1])

    def as_array(self) -> np.ndarray:
        return np.array([self.v1, self.v2])


def appendix_game() -> TensorGame:
    a = np.array([[3.0, 0.0], [1.0, 4.0]])
    return TensorGame((a, -a))


def limit_circle_radius() -> float:
    return 1.0 / 3.0


def _check_small(v0: ReducedState):
    if v0.radius() > limit_circle_radius() + 1e-12:
        raise DomainError(
            f"initial radius {v0.radius():.6g} exceeds 1/3; the trajectory touches "
            "the boundary and has no closed form here"
        )


def analytic_solution(v0: ReducedState, t: float) -> ReducedState:
    _check_small(v0)
    if t < 0:
        raise DomainError("t must be non-negative")
    a, b = v0.v1 - CENTER[0], v0.v2 - CENTER[1]
    c, s = math.cos(RATE * t), math.sin(RATE * t)
    v1 = a * c - b * s + CENTER[0]
    v2 = b * c + a * s + CENTER[1]
    # rounding can leave a radius-1/3 orbit a hair outside the square
    return ReducedState(min(max(v1, 0.0), 1.0), min(max(v2, 0.0), 1.0))


def analytic_cesaro(v0: ReducedState, t: float) -> ReducedState:
    """Exact time average of :func:`analytic_solution` over ``[0, t]``."""
    _check_small(v0)
    if t <= 0:
        raise DomainError("t must be positive")
    a, b = v0.v1 - CENTER[0], v0.v2 - CENTER[1]
    w = RATE * t
    sin_term = math.sin(w) / w
    cos_term = (1.0 - math.cos(w)) / w
    return ReducedState(
        CENTER[0] + a * sin_term - b * cos_term,
        CENTER[1] + b * sin_term + a * cos_term,
    )


def reduce(profile) -> ReducedState:
    arrays = profile.arrays if isinstance(profile, StrategyProfile) else [np.asarray(p) for p in profile]
    if len(arrays) != 2 or any(np.shape(p) != (2,) for p in arrays):
        raise InvalidInputError("reduce expects a 2-player, 2-action profile")
    return ReducedState(float(arrays[0][0]), float(arrays[1][0]))


def lift(v: ReducedState) -> StrategyProfile:
    return StrategyProfile(((v.v1, 1.0 - v.v1), (v.v2, 1.0 - v.v2)))
