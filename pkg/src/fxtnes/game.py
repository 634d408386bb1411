"""Game definitions, cost evaluation, classification, and equilibria.

The seeking dynamics only ever consume a cost oracle (``n_players`` plus
``cost(i, u)``); the analytic pseudo-gradient defined here feeds the
model-based subsystems (reduced, average, boundary layer) and the
ground-truth analysis, never the model-free loop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import GameDefinitionError
from .linalg import SYMMETRY_TOL, min_symmetric_eigenvalue


@runtime_checkable
class CostOracle(Protocol):
    """Minimal interface the seeking dynamics require from a game."""

    n_players: int

    def cost(self, i: int, u: np.ndarray) -> float: ...


@dataclass(frozen=True)
class QuadraticGame:
    """N-player game with costs J_i(u) = u^T Q_i u + b_i^T u + c_i.

    Parameters
    ----------
    Q : (N, N, N) array
        Q[i] is player i's quadratic coefficient matrix.
    b : (N, N) array
        b[i] is player i's linear coefficient vector.
    c : (N,) array
        Constant offsets.
    """

    Q: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        q = np.array(self.Q, dtype=float)
        bv = np.array(self.b, dtype=float)
        cv = np.array(self.c, dtype=float)
        if q.ndim != 3 or q.shape[1] != q.shape[2] or q.shape[0] != q.shape[1]:
            raise GameDefinitionError(
                f"Q must stack N matrices of shape NxN, got {q.shape}"
            )
        n = q.shape[0]
        if n < 2:
            raise GameDefinitionError("need at least 2 players")
        if bv.shape != (n, n):
            raise GameDefinitionError(
                f"b must be N vectors of length N, got {bv.shape}"
            )
        if cv.shape != (n,):
            raise GameDefinitionError(f"c must have length N, got {cv.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(bv)) and np.all(np.isfinite(cv))):
            raise GameDefinitionError("game data must be finite")
        for arr in (q, bv, cv):
            arr.setflags(write=False)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "b", bv)
        object.__setattr__(self, "c", cv)

    @property
    def n_players(self) -> int:
        return self.Q.shape[0]

    def cost(self, i: int, u: np.ndarray) -> float:
        """J_i(u) for 0-based player index i."""
        u = np.asarray(u, dtype=float)
        if not 0 <= i < self.n_players:
            raise IndexError(f"player index {i} out of range [0, {self.n_players})")
        return float(u @ self.Q[i] @ u + self.b[i] @ u + self.c[i])

    def costs(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.array([self.cost(i, u) for i in range(self.n_players)])

    def pseudo_gradient(self, u: np.ndarray) -> np.ndarray:
        """Stacked own-action partials: component i is dJ_i/du_i."""
        m, mv = self.pseudo_gradient_affine()
        return m @ np.asarray(u, dtype=float) + mv

    def pseudo_gradient_affine(self) -> tuple[np.ndarray, np.ndarray]:
        """(M, m) such that the pseudo-gradient is G(u) = M u + m."""
        n = self.n_players
        m = np.empty((n, n))
        for i in range(n):
            m[i, :] = (self.Q[i] + self.Q[i].T)[i, :]
        mv = np.array([self.b[i][i] for i in range(n)])
        return m, mv

    def nash_equilibrium(self) -> np.ndarray:
        """Unique root of the affine pseudo-gradient, M u* + m = 0."""
        m, mv = self.pseudo_gradient_affine()
        try:
            u_star = np.linalg.solve(m, -mv)
        except np.linalg.LinAlgError as exc:
            raise GameDefinitionError(
                "no unique equilibrium: pseudo-gradient Jacobian is singular"
            ) from exc
        return u_star

    def potential_value(self, u: np.ndarray) -> float:
        """P(u) = 0.5 u^T M u + m^T u for a potential game (M symmetric)."""
        m, mv = self.pseudo_gradient_affine()
        if float(np.max(np.abs(m - m.T))) > SYMMETRY_TOL:
            raise GameDefinitionError(
                "potential_value requires a symmetric pseudo-gradient Jacobian"
            )
        u = np.asarray(u, dtype=float)
        return float(0.5 * u @ m @ u + mv @ u)

    def negated(self) -> "QuadraticGame":
        """The game with every cost multiplied by -1.

        Shares the equilibrium of the original game, and its pseudo-gradient
        is the reversed field -G.
        """
        return QuadraticGame(-self.Q, -self.b, -self.c)

    def to_dict(self) -> dict:
        return {
            "n_players": self.n_players,
            "Q": self.Q.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
        }


class GameKind(Enum):
    POTENTIAL = "Potential"
    STRONGLY_MONOTONE = "StronglyMonotone"
    BOTH = "Both"
    NEITHER = "Neither"


@dataclass(frozen=True)
class GameClassification:
    """Structural summary of a quadratic game's pseudo-gradient.

    ``monotonicity_modulus`` is the smallest eigenvalue of the symmetric
    part of the pseudo-gradient Jacobian (meaningful as a strong-monotonicity
    coefficient only when positive). ``pl_modulus`` is the gradient-dominance
    constant of the quadratic potential, defined only for symmetric positive
    definite Jacobians.
    """

    kind: GameKind
    monotonicity_modulus: float
    pl_modulus: float | None


def classify(game: QuadraticGame) -> GameClassification:
    m, _ = game.pseudo_gradient_affine()
    sym = 0.5 * (m + m.T)
    modulus = min_symmetric_eigenvalue(sym)
    is_potential = float(np.max(np.abs(m - m.T))) <= SYMMETRY_TOL
    is_monotone = modulus > 0.0
    if is_potential and is_monotone:
        kind = GameKind.BOTH
    elif is_potential:
        kind = GameKind.POTENTIAL
    elif is_monotone:
        kind = GameKind.STRONGLY_MONOTONE
    else:
        kind = GameKind.NEITHER
    pl = modulus if (is_potential and is_monotone) else None
    return GameClassification(kind=kind, monotonicity_modulus=modulus, pl_modulus=pl)


def game_from_dict(doc: dict) -> QuadraticGame:
    try:
        n = int(doc["n_players"])
        q = doc["Q"]
        b = doc["b"]
        c = doc["c"]
    except KeyError as exc:
        raise GameDefinitionError(f"game document missing field {exc}") from exc
    game = QuadraticGame(Q=q, b=b, c=c)
    if game.n_players != n:
        raise GameDefinitionError(
            f"declared n_players={n} but data is for {game.n_players} players"
        )
    return game


def load_game(path: str | Path) -> QuadraticGame:
    """Read a game from a JSON document with fields n_players, Q, b, c."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return game_from_dict(doc)


def save_game(game: QuadraticGame, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(game.to_dict(), fh, indent=2)
        fh.write("\n")
