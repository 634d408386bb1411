"""Exception hierarchy shared across the package.

Validation failures (bad game data, bad graph, inadmissible parameters,
malformed configs) map to CLI exit code 2; numerical integration aborts
map to exit code 3.
"""

from __future__ import annotations


class FxtnesError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FxtnesError):
    """Malformed or inconsistent experiment configuration."""


class GameDefinitionError(FxtnesError):
    """Invalid game data, or an operation unavailable for this game."""


class GraphError(FxtnesError):
    """Invalid communication graph (shape, self-loops, connectivity)."""


class ParameterError(FxtnesError):
    """Inadmissible dynamics or integrator parameters."""


class EigenSolveError(FxtnesError):
    """The iterative eigensolver failed to converge."""


class IntegrationError(FxtnesError):
    """Non-finite state encountered while integrating.

    Attributes
    ----------
    t : float or None
        Simulation time at which the abort was detected.
    """

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t
