"""Averaged subgradient flows for monotone games and static mean field games."""
from ._backend import DEFAULT as BACKEND
from .errors import DegenerateInputError, DomainError, InvalidInputError, SolverWarning
from .flow import FlowConfig, FlowResult, cesaro_mean, integrate, lipschitz_bound
from .game import (
    MixedStrategy,
    StrategyProfile,
    TensorGame,
    best_response,
    expected_cost,
    nash_gap,
    own_gradient,
    simplex_project,
)

__version__ = "0.1.0"
