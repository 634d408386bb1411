"""Model-free fixed-time Nash equilibrium seeking.

Simulation library and CLI for N-player seeking dynamics with fixed-time
settling guarantees: the full probe-modulated loop, its averaged /
boundary-layer / reduced companions, settling-bound calculators, and the
quadratic-game benchmark experiments.
"""

from .analysis import (
    FixedTimeRegime,
    FixedTimeReport,
    fixed_time_monotone,
    fixed_time_potential,
    gain_for_time_monotone,
    gain_for_time_potential,
    probe_average_check,
    reachable_envelope,
    settling_time,
)
from .dynamics import FxtnesParams, SystemState, alphas, psi
from .errors import (
    ConfigError,
    FxtnesError,
    GameDefinitionError,
    GraphError,
    IntegrationError,
    ParameterError,
)
from .game import GameClassification, GameKind, QuadraticGame, classify, load_game
from .graph import CommGraph, complete_graph
from .integrator import IntegratorConfig, Trajectory, simulate

__version__ = "0.1.0"

__all__ = [
    "FixedTimeRegime",
    "FixedTimeReport",
    "FxtnesParams",
    "SystemState",
    "QuadraticGame",
    "GameClassification",
    "GameKind",
    "CommGraph",
    "IntegratorConfig",
    "Trajectory",
    "alphas",
    "psi",
    "classify",
    "complete_graph",
    "fixed_time_monotone",
    "fixed_time_potential",
    "gain_for_time_monotone",
    "gain_for_time_potential",
    "load_game",
    "probe_average_check",
    "reachable_envelope",
    "settling_time",
    "simulate",
    "FxtnesError",
    "ConfigError",
    "GameDefinitionError",
    "GraphError",
    "ParameterError",
    "IntegrationError",
]
