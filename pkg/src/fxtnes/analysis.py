"""Settling bounds, gain selection, measured settling, and runtime monitors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dynamics import validate_kappa_tilde, as_rational
from .errors import ParameterError
from .game import QuadraticGame
from .integrator import Trajectory

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def _check_alphas(alpha1: float, alpha2: float) -> None:
    if not 0.0 < alpha1 < 1.0:
        raise ParameterError(f"alpha1 must lie in (0, 1), got {alpha1}")
    if not alpha2 < 0.0:
        raise ParameterError(f"alpha2 must be negative, got {alpha2}")


class FixedTimeRegime(Enum):
    POTENTIAL = "Potential"
    MONOTONE = "Monotone"


@dataclass(frozen=True)
class FixedTimeReport:
    """Constants and the settling bound for one regime."""

    regime: FixedTimeRegime
    k: float
    kappa: float
    alpha1: float
    alpha2: float
    gamma1: float | None
    gamma2: float | None
    theta1: float | None
    theta2: float | None
    t_star: float


def potential_constants(kappa: float, alpha1: float, alpha2: float) -> tuple[float, float]:
    """(gamma1, gamma2) = 2^((8-3*alpha)/4) * kappa^((2-alpha)/2)."""
    _check_alphas(alpha1, alpha2)
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    g1 = 2.0 ** ((8.0 - 3.0 * alpha1) / 4.0) * kappa ** ((2.0 - alpha1) / 2.0)
    g2 = 2.0 ** ((8.0 - 3.0 * alpha2) / 4.0) * kappa ** ((2.0 - alpha2) / 2.0)
    return g1, g2


def monotone_constants(alpha1: float, alpha2: float) -> tuple[float, float]:
    """(theta1, theta2) = 2^(-alpha/2)."""
    _check_alphas(alpha1, alpha2)
    return 2.0 ** (-0.5 * alpha1), 2.0 ** (-0.5 * alpha2)


def fixed_time_potential(k: float, kappa: float, alpha1: float, alpha2: float) -> float:
    """Settling bound for the gradient flow of a strongly convex potential."""
    if not k > 0:
        raise ParameterError(f"k must be positive, got {k}")
    g1, g2 = potential_constants(kappa, alpha1, alpha2)
    return (4.0 / k) * (1.0 / (g1 * alpha1) - 1.0 / (g2 * alpha2))


def gain_for_time_potential(t_star: float, kappa: float, alpha1: float, alpha2: float) -> float:
    """Gain k that achieves a prescribed potential-regime settling bound."""
    if not t_star > 0:
        raise ParameterError(f"t_star must be positive, got {t_star}")
    g1, g2 = potential_constants(kappa, alpha1, alpha2)
    return (4.0 / t_star) * (1.0 / (g1 * alpha1) - 1.0 / (g2 * alpha2))


def fixed_time_monotone(k: float, kappa: float, alpha1: float, alpha2: float) -> float:
    """Settling bound for the strongly monotone regime."""
    if not k > 0 or not kappa > 0:
        raise ParameterError("k and kappa must be positive")
    t1, t2 = monotone_constants(alpha1, alpha2)
    return (4.0 / (k * kappa)) * (t1 / alpha1 - t2 / alpha2)


def gain_for_time_monotone(t_star: float, kappa: float, alpha1: float, alpha2: float) -> float:
    """Gain k that achieves a prescribed monotone-regime settling bound."""
    if not t_star > 0 or not kappa > 0:
        raise ParameterError("t_star and kappa must be positive")
    t1, t2 = monotone_constants(alpha1, alpha2)
    return (4.0 / (t_star * kappa)) * (t1 / alpha1 - t2 / alpha2)


def fixed_time_report(
    regime: FixedTimeRegime,
    k: float,
    kappa: float,
    alpha1: float,
    alpha2: float,
) -> FixedTimeReport:
    if regime is FixedTimeRegime.POTENTIAL:
        g1, g2 = potential_constants(kappa, alpha1, alpha2)
        t_star = fixed_time_potential(k, kappa, alpha1, alpha2)
        return FixedTimeReport(regime, k, kappa, alpha1, alpha2, g1, g2, None, None, t_star)
    t1, t2 = monotone_constants(alpha1, alpha2)
    t_star = fixed_time_monotone(k, kappa, alpha1, alpha2)
    return FixedTimeReport(regime, k, kappa, alpha1, alpha2, None, None, t1, t2, t_star)


def settling_from_distances(
    times: np.ndarray, dists: np.ndarray, nu: float
) -> float | None:
    """First recorded time after which the distance stays within nu.

    Backward-scan semantics: the answer is the re-entry time after the LAST
    excursion, not the first crossing. None when even the final sample is
    outside the ball.
    """
    times = np.asarray(times, dtype=float)
    dists = np.asarray(dists, dtype=float)
    if times.shape[0] == 0:
        raise ValueError("empty trajectory")
    if times.shape != dists.shape:
        raise ValueError("times and dists must have equal length")
    outside = dists > nu
    if outside[-1]:
        return None
    idx = np.flatnonzero(outside)
    if idx.size == 0:
        return float(times[0])
    return float(times[idx[-1] + 1])


def trajectory_values(traj: Trajectory) -> np.ndarray:
    """Played-action samples when present, raw states otherwise."""
    return traj.actions if traj.actions is not None else traj.states


def distances_to(traj: Trajectory, u_star: np.ndarray) -> np.ndarray:
    vals = trajectory_values(traj)
    u_star = np.asarray(u_star, dtype=float)
    return np.linalg.norm(vals[:, : u_star.shape[0]] - u_star, axis=1)


def settling_time(traj: Trajectory, u_star: np.ndarray, nu: float) -> float | None:
    """Measured settling of |u(t) - u*| on the recorded grid."""
    return settling_from_distances(traj.times, distances_to(traj, u_star), nu)


def per_player_distances(states: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Worst per-player estimator error along a matrix-valued trajectory.

    states has shape (n_records, n*n) with row i of each record holding
    player i's estimate of the full pseudogradient; target is the (n, n)
    equilibrium. Returns, per record, the maximum over players of the
    Euclidean error of that player's row.
    """
    target = np.asarray(target, dtype=float)
    n = target.shape[0]
    err = states.reshape(-1, n, n) - target[None, :, :]
    return np.linalg.norm(err, axis=2).max(axis=1)


def common_period(kappa_tilde: Sequence[Fraction]) -> Fraction:
    """Least common multiple of the probe periods 1/kappa_tilde_i.

    Expressed in normalized time tau = t/eps2, where probe i advances with
    angular rate 2*pi*kappa_tilde_i.
    """
    kt = [as_rational(v) for v in kappa_tilde]
    periods = [Fraction(v.denominator, v.numerator) for v in kt]
    num = 1
    for p in periods:
        num = math.lcm(num, p.numerator)
    den = 0
    for p in periods:
        den = math.gcd(den, p.denominator)
    return Fraction(num, den)


@dataclass(frozen=True)
class ProbeAverageReport:
    """Quadrature check of the probe averaging identities."""

    max_mean_abs: float
    max_second_moment_err: float
    period: Fraction
    n_points: int


def probe_average_check(
    kappa_tilde: Sequence,
    n_points: int = 100_000,
    phases0: np.ndarray | None = None,
) -> ProbeAverageReport:
    """Trapezoid averages of the probes over the exact common period.

    Verifies mean(mu_hat) = 0 and (1/T) int mu_hat mu_hat^T = I/2, which
    hold for any frequency vector passing the admissibility gate.
    """
    kt = [as_rational(v) for v in kappa_tilde]
    validate_kappa_tilde(kt)
    n = len(kt)
    if n_points < 8:
        raise ParameterError("n_points too small for a meaningful quadrature")
    period = common_period(kt)
    t_period = float(period)
    phases0 = np.zeros(n) if phases0 is None else np.asarray(phases0, dtype=float)
    tau = np.linspace(0.0, t_period, n_points + 1)
    rates = 2.0 * np.pi * np.array([float(v) for v in kt])
    mu = np.cos(phases0[:, None] + rates[:, None] * tau[None, :])
    mean = _trapezoid(mu, tau, axis=1) / t_period
    second = _trapezoid(mu[:, None, :] * mu[None, :, :], tau, axis=2) / t_period
    err = np.abs(second - 0.5 * np.eye(n))
    return ProbeAverageReport(
        max_mean_abs=float(np.max(np.abs(mean))),
        max_second_moment_err=float(np.max(err)),
        period=period,
        n_points=n_points,
    )


def monotone_rate_constants(alpha1: float, alpha2: float):
    """((c1, g1), (c2, g2)) in dV/dt <= -k*kappa*(c1 V^g1 + c2 V^g2)."""
    _check_alphas(alpha1, alpha2)
    out = []
    for alpha in (alpha1, alpha2):
        abar = 2.0 - alpha
        out.append((2.0 ** (0.5 * abar), 0.5 * abar))
    return tuple(out)


def potential_rate_constants(kappa: float, alpha1: float, alpha2: float):
    """((c1, g1), (c2, g2)) in dV/dt <= -k*(c1 V^g1 + c2 V^g2).

    Same constants as the potential settling bound: c = gamma, g in (0,1)
    for the first pair and g > 1 for the second.
    """
    g1, g2 = potential_constants(kappa, alpha1, alpha2)
    e1 = (2.0 + (2.0 - alpha1)) / 4.0
    e2 = (2.0 + (2.0 - alpha2)) / 4.0
    return ((g1, e1), (g2, e2))


def _decrease_violations(
    times: np.ndarray,
    v: np.ndarray,
    bound_scale: float,
    pairs,
    slack: float,
    abs_tol: float,
    v_floor: float,
) -> int:
    """Count finite-difference violations of dV/dt <= -scale*(sum c V^g).

    The bound is evaluated at the right endpoint of each record interval:
    V is nonincreasing and the bound magnitude grows with V, so the
    continuum inequality implies the discrete one evaluated there.

    Records with V <= v_floor are skipped: a fixed-step solver cannot
    resolve the non-Lipschitz extinction and chatters on a plateau of
    order (h k |M| / 2)^4 / 2 near the equilibrium, which is measurement
    noise rather than a decrease failure.
    """
    count = 0
    for j in range(len(times) - 1):
        v0, v1 = v[j], v[j + 1]
        if v0 <= v_floor or v1 <= v_floor:
            continue
        dt = times[j + 1] - times[j]
        rate = (v1 - v0) / dt
        bound = -bound_scale * sum(c * v1**g for c, g in pairs)
        if rate > bound * (1.0 - slack) + abs_tol:
            count += 1
    return count


def lyapunov_monotone_monitor(
    traj: Trajectory,
    game: QuadraticGame,
    k: float,
    kappa: float,
    alpha1: float,
    alpha2: float,
    slack: float = 0.05,
    abs_tol: float = 1e-8,
    v_floor: float = 1e-8,
) -> int:
    """Violations of the monotone-regime decrease along a reduced run.

    V = 0.5 |G(z)|^2 sampled at record times; returns the number of record
    intervals whose finite-difference slope exceeds the decrease bound
    beyond slack.
    """
    m, mv = game.pseudo_gradient_affine()
    z = traj.states
    g = z @ m.T + mv
    v = 0.5 * np.sum(g * g, axis=1)
    pairs = monotone_rate_constants(alpha1, alpha2)
    return _decrease_violations(traj.times, v, k * kappa, pairs, slack, abs_tol, v_floor)


def lyapunov_potential_monitor(
    traj: Trajectory,
    game: QuadraticGame,
    k: float,
    kappa: float,
    alpha1: float,
    alpha2: float,
    slack: float = 0.05,
    abs_tol: float = 1e-8,
    v_floor: float = 1e-8,
) -> int:
    """Violations of the potential-regime decrease along a reduced run.

    V = 0.5 (P(z) - P(u*))^2 with kappa the gradient-dominance constant of
    the quadratic potential.
    """
    u_star = game.nash_equilibrium()
    p_star = game.potential_value(u_star)
    p = np.array([game.potential_value(z) for z in traj.states])
    v = 0.5 * (p - p_star) ** 2
    pairs = potential_rate_constants(kappa, alpha1, alpha2)
    return _decrease_violations(traj.times, v, k, pairs, slack, abs_tol, v_floor)


@dataclass
class Envelope:
    """Per-time componentwise extremes over a batch of trajectories."""

    times: np.ndarray
    coord_min: np.ndarray
    coord_max: np.ndarray
    dist_min: np.ndarray | None = None
    dist_max: np.ndarray | None = None


def reachable_envelope(
    trajectories: Sequence[Trajectory],
    u_star: np.ndarray | None = None,
) -> Envelope:
    """Componentwise min/max (and distance band) across trajectories.

    All trajectories must share one record grid.
    """
    if not trajectories:
        raise ValueError("need at least one trajectory")
    times = trajectories[0].times
    for traj in trajectories[1:]:
        if traj.times.shape != times.shape or not np.array_equal(traj.times, times):
            raise ValueError("trajectories do not share a record grid")
    stack = np.stack([trajectory_values(t) for t in trajectories])
    env = Envelope(
        times=times,
        coord_min=stack.min(axis=0),
        coord_max=stack.max(axis=0),
    )
    if u_star is not None:
        dists = np.stack([distances_to(t, u_star) for t in trajectories])
        env.dist_min = dists.min(axis=0)
        env.dist_max = dists.max(axis=0)
    return env
