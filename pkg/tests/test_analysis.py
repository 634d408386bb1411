"""Settling bounds, probe averaging, measured settling, decrease monitors."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fxtnes.analysis import (
    Envelope,
    FixedTimeRegime,
    common_period,
    distances_to,
    fixed_time_monotone,
    fixed_time_potential,
    fixed_time_report,
    gain_for_time_monotone,
    gain_for_time_potential,
    lyapunov_monotone_monitor,
    lyapunov_potential_monitor,
    monotone_constants,
    monotone_rate_constants,
    per_player_distances,
    potential_constants,
    potential_rate_constants,
    probe_average_check,
    reachable_envelope,
    settling_from_distances,
    settling_time,
    trajectory_values,
)
from fxtnes.dynamics import make_reduced_rhs
from fxtnes.errors import ParameterError
from fxtnes.integrator import IntegratorConfig, Trajectory, simulate
from fxtnes.presets import REPORTED_KAPPA, derived_kappa, potential_test_game, seeking_game
from oracles import comparison_ode_extinction

A1, A2 = 0.5, -1.0


# --- constants and bounds ----------------------------------------------------


def test_monotone_constants_frozen():
    t1, t2 = monotone_constants(A1, A2)
    assert t1 == pytest.approx(2.0**-0.25, abs=1e-15)
    assert t2 == pytest.approx(2.0**0.5, abs=1e-15)


def test_monotone_bracket_frozen():
    t1, t2 = monotone_constants(A1, A2)
    assert t1 / A1 - t2 / A2 == pytest.approx(3.0960063928805241, abs=1e-14)


def test_potential_constants_frozen():
    g1, g2 = potential_constants(1.0, A1, A2)
    assert g1 == pytest.approx(2.0**1.625, abs=1e-13)
    assert g2 == pytest.approx(2.0**2.75, abs=1e-13)


def test_fixed_time_monotone_frozen_values():
    assert fixed_time_monotone(1.0, derived_kappa(), A1, A2) == pytest.approx(
        3.6008103729772714, abs=1e-12
    )
    assert fixed_time_monotone(1.0, REPORTED_KAPPA, A1, A2) == pytest.approx(
        2.846902430234965, abs=1e-12
    )


def test_fixed_time_potential_frozen_value():
    assert fixed_time_potential(1.0, 1.0, A1, A2) == pytest.approx(
        3.1882826668033797, abs=1e-12
    )


def test_bound_scales_inversely_with_gain():
    base = fixed_time_monotone(1.0, 2.0, A1, A2)
    assert fixed_time_monotone(4.0, 2.0, A1, A2) == pytest.approx(base / 4.0, rel=1e-14)
    pbase = fixed_time_potential(1.0, 2.0, A1, A2)
    assert fixed_time_potential(4.0, 2.0, A1, A2) == pytest.approx(pbase / 4.0, rel=1e-14)


@given(
    st.floats(min_value=0.01, max_value=100.0),
    st.floats(min_value=0.01, max_value=100.0),
    st.floats(min_value=0.05, max_value=0.95),
    st.floats(min_value=-4.0, max_value=-0.05),
)
def test_gain_round_trip_monotone(t_star, kappa, a1, a2):
    k = gain_for_time_monotone(t_star, kappa, a1, a2)
    assert k > 0
    assert fixed_time_monotone(k, kappa, a1, a2) == pytest.approx(t_star, rel=1e-12)


@given(
    st.floats(min_value=0.01, max_value=100.0),
    st.floats(min_value=0.01, max_value=100.0),
    st.floats(min_value=0.05, max_value=0.95),
    st.floats(min_value=-4.0, max_value=-0.05),
)
def test_gain_round_trip_potential(t_star, kappa, a1, a2):
    k = gain_for_time_potential(t_star, kappa, a1, a2)
    assert k > 0
    assert fixed_time_potential(k, kappa, a1, a2) == pytest.approx(t_star, rel=1e-12)


@given(
    st.floats(min_value=0.05, max_value=0.95),
    st.floats(min_value=-4.0, max_value=-0.05),
    st.floats(min_value=0.01, max_value=50.0),
)
def test_bounds_positive_on_admissible_exponents(a1, a2, kappa):
    assert fixed_time_monotone(1.0, kappa, a1, a2) > 0.0
    assert fixed_time_potential(1.0, kappa, a1, a2) > 0.0


def test_bound_decreasing_in_kappa():
    kappas = [0.5, 1.0, 2.0, 4.35, 10.0]
    vals = [fixed_time_monotone(1.0, kp, A1, A2) for kp in kappas]
    assert np.all(np.diff(vals) < 0.0)


def test_inadmissible_exponents_rejected():
    for a1, a2 in ((0.0, -1.0), (1.0, -1.0), (0.5, 0.0), (0.5, 0.5)):
        with pytest.raises(ParameterError):
            fixed_time_monotone(1.0, 1.0, a1, a2)
        with pytest.raises(ParameterError):
            potential_constants(1.0, a1, a2)
    with pytest.raises(ParameterError):
        fixed_time_monotone(0.0, 1.0, A1, A2)
    with pytest.raises(ParameterError):
        potential_constants(-1.0, A1, A2)


def test_fixed_time_report_fields():
    rep = fixed_time_report(FixedTimeRegime.MONOTONE, 2.0, 3.0, A1, A2)
    assert rep.regime is FixedTimeRegime.MONOTONE
    assert rep.gamma1 is None and rep.gamma2 is None
    assert rep.theta1 == pytest.approx(2.0**-0.25)
    assert rep.t_star == pytest.approx(fixed_time_monotone(2.0, 3.0, A1, A2))

    rep = fixed_time_report(FixedTimeRegime.POTENTIAL, 2.0, 3.0, A1, A2)
    assert rep.theta1 is None and rep.theta2 is None
    assert rep.gamma1 is not None
    assert rep.t_star == pytest.approx(fixed_time_potential(2.0, 3.0, A1, A2))


# --- settling bound dominates the comparison flow ----------------------------


@pytest.mark.parametrize("v0", [1.0, 1e4, 1e8])
def test_monotone_bound_dominates_comparison_ode(v0):
    """The settling bound upper-bounds the extinction time of the equality
    comparison flow dV/dt = -k kappa sum(c V^g) from any start."""
    k, kappa = 1.0, derived_kappa()
    t_star = fixed_time_monotone(k, kappa, A1, A2)
    pairs = list(monotone_rate_constants(A1, A2))
    ext = comparison_ode_extinction(k * kappa, pairs, v0, 1.2 * t_star, n_steps=400_000)
    assert ext <= t_star


@pytest.mark.parametrize("v0", [1.0, 1e6])
def test_potential_bound_dominates_comparison_ode(v0):
    k, kappa = 1.0, 2.0
    t_star = fixed_time_potential(k, kappa, A1, A2)
    pairs = list(potential_rate_constants(kappa, A1, A2))
    ext = comparison_ode_extinction(k, pairs, v0, 1.2 * t_star, n_steps=400_000)
    assert ext <= t_star


def test_rate_constants_shapes():
    (c1, g1), (c2, g2) = monotone_rate_constants(A1, A2)
    assert c1 == pytest.approx(2.0**0.75)
    assert g1 == pytest.approx(0.75)
    assert c2 == pytest.approx(2.0**1.5)
    assert g2 == pytest.approx(1.5)
    (p1, e1), (p2, e2) = potential_rate_constants(3.0, A1, A2)
    assert 0.0 < e1 < 1.0 < e2
    assert p1 > 0 and p2 > 0


# --- probe averaging ----------------------------------------------------------


def test_common_period_primes():
    assert common_period([Fraction(2), Fraction(3), Fraction(5)]) == Fraction(1)


def test_common_period_rationals():
    assert common_period([Fraction(3, 2), Fraction(5, 2)]) == Fraction(2)
    assert common_period([Fraction(1, 3), Fraction(1, 5)]) == Fraction(15)


def test_probe_average_benchmark_frequencies():
    rep = probe_average_check((2, 3, 5))
    assert rep.period == Fraction(1)
    assert rep.max_mean_abs <= 1e-10
    assert rep.max_second_moment_err <= 1e-8


def test_probe_average_single_frequency():
    """One probe: mean zero and mean of cos^2 = 1/2 over its period."""
    rep = probe_average_check((1,))
    assert rep.max_mean_abs <= 1e-10
    assert rep.max_second_moment_err <= 1e-8


def test_probe_average_nonzero_phases():
    rng = np.random.default_rng(0)
    rep = probe_average_check((2, 3, 5), phases0=rng.uniform(0, 2 * np.pi, 3))
    assert rep.max_mean_abs <= 1e-10
    assert rep.max_second_moment_err <= 1e-8


def test_probe_average_rejects_inadmissible():
    with pytest.raises(ParameterError, match="twice"):
        probe_average_check((1, 2))
    with pytest.raises(ParameterError, match="quadrature"):
        probe_average_check((2, 3, 5), n_points=4)


# --- measured settling ---------------------------------------------------------


def test_settling_constant_inside_ball():
    times = np.arange(5.0)
    dists = np.full(5, 0.01)
    assert settling_from_distances(times, dists, 0.25) == 0.0


def test_settling_reentry_semantics():
    """The answer follows the LAST excursion, not the first crossing."""
    times = np.arange(5.0)
    dists = np.array([5.0, 0.1, 2.0, 0.05, 0.01])
    assert settling_from_distances(times, dists, 0.25) == 3.0


def test_settling_none_when_final_outside():
    times = np.arange(3.0)
    dists = np.array([0.1, 0.1, 1.0])
    assert settling_from_distances(times, dists, 0.25) is None


def test_settling_validates_input():
    with pytest.raises(ValueError, match="empty"):
        settling_from_distances(np.array([]), np.array([]), 0.1)
    with pytest.raises(ValueError, match="equal length"):
        settling_from_distances(np.arange(3.0), np.arange(4.0), 0.1)


def test_settling_time_prefers_actions():
    times = np.arange(3.0)
    states = np.zeros((3, 2))
    actions = np.array([[5.0, 5.0], [0.0, 0.0], [0.0, 0.0]])
    traj = Trajectory(times=times, states=states, actions=actions)
    assert np.array_equal(trajectory_values(traj), actions)
    assert settling_time(traj, np.zeros(2), 0.25) == 1.0


def test_distances_to_uses_leading_block():
    times = np.arange(2.0)
    states = np.array([[3.0, 4.0, 99.0], [0.0, 0.0, 99.0]])
    traj = Trajectory(times=times, states=states)
    d = distances_to(traj, np.zeros(2))
    assert np.allclose(d, [5.0, 0.0])


def test_per_player_distances_frozen_example():
    target = np.zeros((2, 2))
    states = np.array([[3.0, 4.0, 1.0, 0.0]])  # rows (3,4) and (1,0)
    d = per_player_distances(states, target)
    assert d.shape == (1,)
    assert d[0] == pytest.approx(5.0)


# --- decrease monitors ---------------------------------------------------------


@pytest.fixture(scope="module")
def reduced_run_monotone():
    game = seeking_game()
    cfg = IntegratorConfig(step=1e-3, t_end=6.0, record_stride=10, substep_cap=0.1)
    return simulate(make_reduced_rhs(game, 1.0, A1, A2), np.array([-15.0, 10.0, 5.0]), cfg)


def test_monotone_monitor_zero_violations(reduced_run_monotone):
    count = lyapunov_monotone_monitor(
        reduced_run_monotone, seeking_game(), k=1.0, kappa=derived_kappa(),
        alpha1=A1, alpha2=A2,
    )
    assert count == 0


def test_monotone_value_function_nonincreasing(reduced_run_monotone):
    game = seeking_game()
    m, mv = game.pseudo_gradient_affine()
    g = reduced_run_monotone.states @ m.T + mv
    v = 0.5 * np.sum(g * g, axis=1)
    assert np.all(np.diff(v) <= 1e-9 * max(1.0, v[0]))


def test_monotone_monitor_flags_too_large_kappa(reduced_run_monotone):
    """Demanding a decrease far above the true modulus must trip the check."""
    count = lyapunov_monotone_monitor(
        reduced_run_monotone, seeking_game(), k=1.0, kappa=40.0 * derived_kappa(),
        alpha1=A1, alpha2=A2,
    )
    assert count > 0


def test_potential_monitor_zero_violations():
    game = potential_test_game()
    cfg = IntegratorConfig(step=1e-3, t_end=4.0, record_stride=10, substep_cap=0.1)
    traj = simulate(make_reduced_rhs(game, 1.0, A1, A2), np.array([5.0, -4.0, 3.0]), cfg)
    count = lyapunov_potential_monitor(
        traj, game, k=1.0, kappa=2.0, alpha1=A1, alpha2=A2
    )
    assert count == 0


# --- envelopes -----------------------------------------------------------------


def test_envelope_single_trajectory_identity():
    times = np.arange(4.0)
    states = np.arange(8.0).reshape(4, 2)
    env = reachable_envelope([Trajectory(times=times, states=states)])
    assert np.array_equal(env.coord_min, states)
    assert np.array_equal(env.coord_max, states)
    assert env.dist_min is None


def test_envelope_min_max_and_distance_band():
    times = np.arange(3.0)
    a = Trajectory(times=times, states=np.full((3, 2), 1.0))
    b = Trajectory(times=times, states=np.full((3, 2), -2.0))
    env = reachable_envelope([a, b], u_star=np.zeros(2))
    assert np.all(env.coord_min == -2.0)
    assert np.all(env.coord_max == 1.0)
    assert np.allclose(env.dist_min, np.sqrt(2.0))
    assert np.allclose(env.dist_max, np.sqrt(8.0))


def test_envelope_rejects_mismatched_grids():
    a = Trajectory(times=np.arange(3.0), states=np.zeros((3, 2)))
    b = Trajectory(times=np.arange(4.0), states=np.zeros((4, 2)))
    with pytest.raises(ValueError, match="record grid"):
        reachable_envelope([a, b])
    with pytest.raises(ValueError, match="at least one"):
        reachable_envelope([])
