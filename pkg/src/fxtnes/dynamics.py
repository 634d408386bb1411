"""Vector fields for the seeking loop and its analytical companions.

The full model-free loop sees the game only through a cost oracle. The
reduced, average, and boundary-layer flows are model-based companions and
use the analytic pseudo-gradient.

State conventions
-----------------
Full and baseline systems integrate y = [u_hat (N), x row-stacked (N*N)].
Probe phases are never integrated: they are affine functions of time and
are evaluated in closed form wherever needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError
from .game import CostOracle, QuadraticGame
from .graph import CommGraph, require_connected

RationalLike = int | str | Fraction | tuple | float


def as_rational(value: RationalLike) -> Fraction:
    """Exact rational from an int, Fraction, 'p/q' string, (p, q) pair, or float."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParameterError(f"probe frequency {value!r} is not a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"cannot parse rational {value!r}") from exc
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    raise ParameterError(f"cannot interpret {value!r} as a rational")


def validate_kappa_tilde(kappa_tilde: Sequence[Fraction]) -> None:
    """Reject probe-frequency vectors that break the averaging identities.

    Every frequency must be a positive rational, pairwise distinct, and no
    frequency may be exactly twice another.
    """
    kt = list(kappa_tilde)
    for v in kt:
        if v <= 0:
            raise ParameterError(f"probe frequency {v} must be positive")
    n = len(kt)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if kt[i] == kt[j]:
                raise ParameterError(
                    f"probe frequencies must be pairwise distinct: "
                    f"kappa_tilde[{i}] == kappa_tilde[{j}] == {kt[i]}"
                )
            if kt[i] == 2 * kt[j]:
                raise ParameterError(
                    f"probe frequency kappa_tilde[{i}] = {kt[i]} is exactly "
                    f"twice kappa_tilde[{j}] = {kt[j]}"
                )


def first_primes(n: int) -> tuple[int, ...]:
    primes: list[int] = []
    candidate = 2
    while len(primes) < n:
        if all(candidate % p for p in primes):
            primes.append(candidate)
        candidate += 1
    return tuple(primes)


def alphas(q1: float, q2: float) -> tuple[float, float]:
    """Exponent pair (alpha1, alpha2) from the admissible (q1, q2).

    alpha = (q - 2)/(q - 1); q1 in (2, inf) gives alpha1 in (0, 1) and
    q2 in (1, 2) gives alpha2 < 0.
    """
    if not q1 > 2.0:
        raise ParameterError(f"q1 must lie in (2, inf), got {q1}")
    if not 1.0 < q2 < 2.0:
        raise ParameterError(f"q2 must lie in (1, 2), got {q2}")
    return (q1 - 2.0) / (q1 - 1.0), (q2 - 2.0) / (q2 - 1.0)


def psi(s: float, alpha1: float, alpha2: float) -> float:
    """s^(-alpha1/2) + s^(-alpha2/2) for s > 0 (s is a squared norm)."""
    return s ** (-0.5 * alpha1) + s ** (-0.5 * alpha2)


@dataclass(frozen=True)
class FxtnesParams:
    """All tunable constants of the seeking dynamics.

    kappa_tilde entries are exact rationals so the probe common period is
    well defined. rho2 rescales each player's oscillator pair; the phase
    rate 2*pi*kappa_tilde_i/eps2 is independent of it.
    """

    k: float
    q1: float
    q2: float
    a: np.ndarray
    eps1: float
    eps2: float
    kappa_tilde: tuple[Fraction, ...]
    rho2: np.ndarray | None = None
    phases0: np.ndarray | None = None
    sing_tol: float = 1e-9

    def __post_init__(self):
        if not self.k > 0:
            raise ParameterError(f"gain k must be positive, got {self.k}")
        alphas(self.q1, self.q2)  # admissibility gate
        a = np.atleast_1d(np.array(self.a, dtype=float))
        if np.any(a <= 0.0) or np.any(a >= 1.0):
            raise ParameterError("dither amplitudes a_i must lie in (0, 1)")
        if not self.eps1 > 0 or not self.eps2 > 0:
            raise ParameterError("eps1 and eps2 must be positive")
        if not self.eps2 < self.eps1:
            raise ParameterError(
                f"need eps2 < eps1 (two-time-scale ordering), "
                f"got eps2={self.eps2}, eps1={self.eps1}"
            )
        kt = tuple(as_rational(v) for v in self.kappa_tilde)
        if len(kt) != a.shape[0]:
            raise ParameterError(
                f"got {len(kt)} probe frequencies for {a.shape[0]} players"
            )
        validate_kappa_tilde(kt)
        rho2 = self.rho2
        rho2 = np.ones(a.shape[0]) if rho2 is None else np.atleast_1d(np.array(rho2, dtype=float))
        if np.any(rho2 <= 0):
            raise ParameterError("rho2 entries must be positive")
        phases0 = self.phases0
        phases0 = np.zeros(a.shape[0]) if phases0 is None else np.atleast_1d(np.array(phases0, dtype=float))
        if phases0.shape != a.shape or rho2.shape != a.shape:
            raise ParameterError("a, rho2, phases0 must share one length N")
        if not self.sing_tol >= 0:
            raise ParameterError("sing_tol must be nonnegative")
        for arr in (a, rho2, phases0):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "kappa_tilde", kt)
        object.__setattr__(self, "rho2", rho2)
        object.__setattr__(self, "phases0", phases0)

    @property
    def n_players(self) -> int:
        return self.a.shape[0]

    @property
    def alphas(self) -> tuple[float, float]:
        return alphas(self.q1, self.q2)

    @property
    def probe_rates(self) -> np.ndarray:
        """Angular rates d(phi_i)/dt = 2*pi*kappa_tilde_i/eps2."""
        kt = np.array([float(v) for v in self.kappa_tilde])
        return 2.0 * np.pi * kt / self.eps2


@dataclass
class SystemState:
    """Full seeking-loop state: nominal actions, estimators, probe phases."""

    u_hat: np.ndarray
    x: np.ndarray
    probe_phase: np.ndarray

    def pack(self) -> np.ndarray:
        return np.concatenate([self.u_hat, self.x.ravel()])

    @staticmethod
    def unpack(y: np.ndarray, n: int, probe_phase: np.ndarray) -> "SystemState":
        return SystemState(
            u_hat=y[:n].copy(),
            x=y[n:].reshape(n, n).copy(),
            probe_phase=probe_phase,
        )


def action(u_hat: np.ndarray, probe_phase: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Played actions u_i = u_hat_i + a_i cos(phi_i)."""
    return u_hat + a * np.cos(probe_phase)


def probe_phase_advance(phase: np.ndarray, t_delta: float, params: FxtnesParams) -> np.ndarray:
    """Exact rotation of the probe phases over t_delta, wrapped to [0, 2*pi)."""
    if t_delta < 0:
        raise ParameterError("t_delta must be nonnegative")
    return np.mod(phase + params.probe_rates * t_delta, 2.0 * np.pi)


def drift_u(x: np.ndarray, params: FxtnesParams, use_psi: bool = True) -> np.ndarray:
    """Nominal-action drift: -k x_ii psi(x_i^T x_i), guarded at |x_i| = 0.

    With use_psi False this is the plain gradient-play drift -k x_ii used
    by the baseline comparison.
    """
    a1, a2 = params.alphas
    n = x.shape[0]
    out = np.zeros(n)
    for i in range(n):
        if use_psi:
            s = float(x[i] @ x[i])
            if np.sqrt(s) <= params.sing_tol:
                continue
            out[i] = -params.k * x[i, i] * psi(s, a1, a2)
        else:
            out[i] = -params.k * x[i, i]
    return out


def drift_x(
    x: np.ndarray,
    u: np.ndarray,
    probe_phase: np.ndarray,
    game: CostOracle,
    graph: CommGraph,
    params: FxtnesParams,
) -> np.ndarray:
    """Estimator drift (the 1/eps1 factor applied).

    eps1 xdot_ij = sum_{k in N_i}(x_kj - x_ij)
                   + delta_ij ((2/a_i) J_i(u) cos(phi_i) - x_ij)
    """
    lap = graph.laplacian()
    dx = -(lap @ x)
    mu = np.cos(probe_phase)
    for i in range(x.shape[0]):
        j_i = game.cost(i, u)
        dx[i, i] += (2.0 / params.a[i]) * j_i * mu[i] - x[i, i]
    return dx / params.eps1


def rhs_full(
    t: float,
    state: SystemState,
    game: CostOracle,
    graph: CommGraph,
    params: FxtnesParams,
    use_psi: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives (du_hat, dx) of the full loop at time t.

    Probe phases are evaluated in closed form at t from params; the phases
    stored in `state` are ignored for stage evaluation so that integrator
    stages see exact oscillator values.
    """
    phases = params.phases0 + params.probe_rates * t
    u = action(state.u_hat, phases, params.a)
    du = drift_u(state.x, params, use_psi=use_psi)
    dx = drift_x(state.x, u, phases, game, graph, params)
    return du, dx


def make_full_rhs(
    game: CostOracle,
    graph: CommGraph,
    params: FxtnesParams,
    use_psi: bool = True,
) -> Callable[[float, np.ndarray], np.ndarray]:
    """Flat-vector adapter of the full loop for the integrator.

    y = [u_hat, x.ravel()]. Only the cost oracle is captured; the analytic
    pseudo-gradient is never consulted here.
    """
    require_connected(graph)
    n = params.n_players
    if graph.n != n:
        raise ParameterError(f"graph has {graph.n} vertices for {n} players")
    lap = graph.laplacian()
    rates = params.probe_rates
    phases0 = params.phases0
    a = params.a
    a1, a2 = params.alphas
    k = params.k
    eps1 = params.eps1
    sing = params.sing_tol

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        uh = y[:n]
        x = y[n:].reshape(n, n)
        phases = phases0 + rates * t
        mu = np.cos(phases)
        u = uh + a * mu
        du = np.zeros(n)
        for i in range(n):
            if use_psi:
                s = float(x[i] @ x[i])
                if np.sqrt(s) > sing:
                    du[i] = -k * x[i, i] * psi(s, a1, a2)
            else:
                du[i] = -k * x[i, i]
        dx = -(lap @ x)
        for i in range(n):
            j_i = game.cost(i, u)
            dx[i, i] += (2.0 / a[i]) * j_i * mu[i] - x[i, i]
        dx /= eps1
        return np.concatenate([du, dx.ravel()])

    return rhs


def rhs_reduced(
    z: np.ndarray,
    game: QuadraticGame,
    k: float,
    alpha1: float,
    alpha2: float,
    sing_tol: float = 1e-9,
    use_psi: bool = True,
) -> np.ndarray:
    """Slow flow with the estimator at quasi-steady state.

    zdot = -k psi(|G(z)|^2) G(z); the plain -k G(z) when use_psi is False.
    Continuously extended to 0 at G(z) = 0.
    """
    g = game.pseudo_gradient(z)
    if not use_psi:
        return -k * g
    s = float(g @ g)
    if np.sqrt(s) <= sing_tol:
        return np.zeros_like(g)
    return -k * psi(s, alpha1, alpha2) * g


def make_reduced_rhs(
    game: QuadraticGame,
    k: float,
    alpha1: float,
    alpha2: float,
    sing_tol: float = 1e-9,
    use_psi: bool = True,
) -> Callable[[float, np.ndarray], np.ndarray]:
    m, mv = game.pseudo_gradient_affine()

    def rhs(t: float, z: np.ndarray) -> np.ndarray:
        g = m @ z + mv
        if not use_psi:
            return -k * g
        s = float(g @ g)
        if np.sqrt(s) <= sing_tol:
            return np.zeros_like(g)
        return -k * psi(s, alpha1, alpha2) * g

    return rhs


def rhs_average_nominal(
    u_a: np.ndarray,
    x_a: np.ndarray,
    game: QuadraticGame,
    graph: CommGraph,
    params: FxtnesParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Probe-averaged loop: estimator forced by the exact pseudo-gradient.

    du_a = drift_u(x_a); eps1 dx_a = -(L kron I + B) x_a + B (G(u_a) o 1),
    returned with the eps1 division applied.
    """
    lap = graph.laplacian()
    g = game.pseudo_gradient(u_a)
    du = drift_u(x_a, params, use_psi=True)
    dx = -(lap @ x_a)
    for i in range(x_a.shape[0]):
        dx[i, i] += g[i] - x_a[i, i]
    return du, dx / params.eps1


def make_average_rhs(
    game: QuadraticGame,
    graph: CommGraph,
    params: FxtnesParams,
) -> Callable[[float, np.ndarray], np.ndarray]:
    """Flat adapter for the average-nominal flow, y = [u_a, x_a.ravel()]."""
    require_connected(graph)
    n = params.n_players
    lap = graph.laplacian()
    m, mv = game.pseudo_gradient_affine()
    a1, a2 = params.alphas
    k = params.k
    eps1 = params.eps1
    sing = params.sing_tol

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        ua = y[:n]
        xa = y[n:].reshape(n, n)
        g = m @ ua + mv
        du = np.zeros(n)
        for i in range(n):
            s = float(xa[i] @ xa[i])
            if np.sqrt(s) > sing:
                du[i] = -k * xa[i, i] * psi(s, a1, a2)
        dx = -(lap @ xa)
        for i in range(n):
            dx[i, i] += g[i] - xa[i, i]
        dx /= eps1
        return np.concatenate([du, dx.ravel()])

    return rhs


def rhs_boundary_layer(
    x: np.ndarray,
    u_frozen: np.ndarray,
    game: QuadraticGame,
    graph: CommGraph,
) -> np.ndarray:
    """Fast estimator flow in the stretched time scale (no eps1 factor)."""
    lap = graph.laplacian()
    g = game.pseudo_gradient(u_frozen)
    dx = -(lap @ x)
    for i in range(x.shape[0]):
        dx[i, i] += g[i] - x[i, i]
    return dx


def make_boundary_rhs(
    game: QuadraticGame,
    graph: CommGraph,
    u_frozen: np.ndarray,
) -> Callable[[float, np.ndarray], np.ndarray]:
    require_connected(graph)
    n = graph.n
    lap = graph.laplacian()
    g = game.pseudo_gradient(u_frozen)

    def rhs(tau: float, y: np.ndarray) -> np.ndarray:
        x = y.reshape(n, n)
        dx = -(lap @ x)
        for i in range(n):
            dx[i, i] += g[i] - x[i, i]
        return dx.ravel()

    return rhs


def estimator_equilibrium(game: QuadraticGame, u: np.ndarray) -> np.ndarray:
    """Frozen-action estimator fixed point: every row equals G(u)."""
    g = game.pseudo_gradient(u)
    return np.tile(g, (len(g), 1))
