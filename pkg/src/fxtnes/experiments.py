"""Experiment runners shared by the CLI, the scripts, and the test suite.

Low-level `integrate_*` functions take explicit pieces; the `run_*`
functions resolve defaults from an ExperimentConfig.

Probe-free flows driven from far-field initial conditions default to a
substep cap of 0.1: the seeking flow grows superlinearly in the distance
to equilibrium, so a fixed step that is stable near the equilibrium
overshoots catastrophically at |z| ~ 1e3. The cap shrinks individual
steps (deterministically) until the per-step displacement is small.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import Envelope, reachable_envelope, settling_time
from .config import ExperimentConfig, grid_points
from .dynamics import (
    FxtnesParams,
    make_average_rhs,
    make_boundary_rhs,
    make_full_rhs,
    make_reduced_rhs,
)
from .errors import ConfigError
from .game import QuadraticGame
from .graph import CommGraph
from .integrator import (
    IntegratorConfig,
    Trajectory,
    default_record_stride,
    default_step_full,
    default_step_smooth,
    simulate,
    validate_step_full,
    validate_step_smooth,
)

DEFAULT_SUBSTEP_CAP = 0.1


def _n_workers() -> int:
    return min(8, os.cpu_count() or 1)


def _actions_on_grid(traj: Trajectory, params: FxtnesParams) -> np.ndarray:
    n = params.n_players
    phases = params.phases0[None, :] + params.probe_rates[None, :] * traj.times[:, None]
    return traj.states[:, :n] + params.a[None, :] * np.cos(phases)


def integrate_full(
    game: QuadraticGame,
    graph: CommGraph,
    params: FxtnesParams,
    integ: IntegratorConfig,
    u_hat0: np.ndarray,
    x0: np.ndarray,
    use_psi: bool = True,
    backend: str = "auto",
) -> Trajectory:
    """Probe-modulated loop (fixed step); actions attached on the grid."""
    validate_step_full(integ.step, params)
    if integ.substep_cap is not None:
        raise ConfigError("the probe-modulated loop is fixed-step only")
    if backend in ("auto", "fast") and isinstance(game, QuadraticGame):
        from . import fastpath

        traj = fastpath.run_es_fast(game, graph, params, integ, u_hat0, x0, use_psi)
    elif backend == "fast":
        raise ConfigError("fast backend requires a quadratic game")
    else:
        rhs = make_full_rhs(game, graph, params, use_psi=use_psi)
        y0 = np.concatenate([np.asarray(u_hat0, float), np.asarray(x0, float).ravel()])
        traj = simulate(rhs, y0, integ)
    traj.actions = _actions_on_grid(traj, params)
    return traj


def integrate_reduced(
    game: QuadraticGame,
    k: float,
    alpha1: float,
    alpha2: float,
    sing_tol: float,
    z0: np.ndarray,
    integ: IntegratorConfig,
    use_psi: bool = True,
    backend: str = "auto",
) -> Trajectory:
    """Slow flow z' = -k psi(|G|^2) G(z) (or -k G(z) for the baseline)."""
    if backend in ("auto", "fast"):
        from . import fastpath

        m, mv = game.pseudo_gradient_affine()
        traj = fastpath.run_reduced_fast(
            m, mv, k, alpha1, alpha2, sing_tol, z0, integ, use_psi
        )
    else:
        rhs = make_reduced_rhs(game, k, alpha1, alpha2, sing_tol, use_psi)
        traj = simulate(rhs, np.asarray(z0, float), integ)
    traj.actions = traj.states
    return traj


def integrate_average(
    game: QuadraticGame,
    graph: CommGraph,
    params: FxtnesParams,
    u0: np.ndarray,
    x0: np.ndarray,
    integ: IntegratorConfig,
) -> Trajectory:
    rhs = make_average_rhs(game, graph, params)
    y0 = np.concatenate([np.asarray(u0, float), np.asarray(x0, float).ravel()])
    traj = simulate(rhs, y0, integ)
    traj.actions = traj.states[:, : params.n_players]
    return traj


def integrate_boundary(
    game: QuadraticGame,
    graph: CommGraph,
    u_frozen: np.ndarray,
    x0: np.ndarray,
    integ: IntegratorConfig,
) -> Trajectory:
    rhs = make_boundary_rhs(game, graph, u_frozen)
    return simulate(rhs, np.asarray(x0, float).ravel(), integ)


def _full_integrator_config(cfg: ExperimentConfig) -> IntegratorConfig:
    step = cfg.step if cfg.step is not None else default_step_full(cfg.params)
    stride = (
        cfg.record_stride
        if cfg.record_stride is not None
        else default_record_stride(step, cfg.t_end)
    )
    return IntegratorConfig(step=step, t_end=cfg.t_end, record_stride=stride)


def _smooth_integrator_config(
    cfg: ExperimentConfig,
    eps1: float,
    default_cap: float | None,
) -> IntegratorConfig:
    step = cfg.step if cfg.step is not None else default_step_smooth(eps1)
    validate_step_smooth(step, eps1)
    stride = (
        cfg.record_stride
        if cfg.record_stride is not None
        else default_record_stride(step, cfg.t_end)
    )
    cap = cfg.substep_cap if cfg.substep_cap is not None else default_cap
    return IntegratorConfig(
        step=step, t_end=cfg.t_end, record_stride=stride, substep_cap=cap
    )


def run_simulate(cfg: ExperimentConfig, use_psi: bool = True) -> Trajectory:
    """Full seeking loop from the configured initial state."""
    integ = _full_integrator_config(cfg)
    return integrate_full(
        cfg.game, cfg.graph, cfg.params, integ, cfg.u_hat0, cfg.x0,
        use_psi=use_psi, backend=cfg.backend,
    )


def run_baseline(cfg: ExperimentConfig) -> Trajectory:
    return run_simulate(cfg, use_psi=False)


def run_reduced(cfg: ExperimentConfig, use_psi: bool = True) -> Trajectory:
    a1, a2 = cfg.params.alphas
    integ = _smooth_integrator_config(cfg, cfg.params.eps1, DEFAULT_SUBSTEP_CAP)
    return integrate_reduced(
        cfg.game, cfg.params.k, a1, a2, cfg.params.sing_tol, cfg.z0, integ,
        use_psi=use_psi, backend=cfg.backend,
    )


def run_average(cfg: ExperimentConfig) -> Trajectory:
    integ = _smooth_integrator_config(cfg, cfg.params.eps1, None)
    return integrate_average(cfg.game, cfg.graph, cfg.params, cfg.u_hat0, cfg.x0, integ)


def run_boundary(cfg: ExperimentConfig) -> Trajectory:
    """Fast estimator flow in stretched time; cfg.t_end is the tau horizon."""
    integ = _smooth_integrator_config(cfg, np.inf, None)
    return integrate_boundary(cfg.game, cfg.graph, cfg.u_frozen, cfg.x0, integ)


@dataclass
class CompareResult:
    """Full-loop seeking vs gradient-play baseline on one record grid."""

    fxt: Trajectory
    baseline: Trajectory
    u_star: np.ndarray
    nu: float
    settle_fxt: float | None
    settle_baseline: float | None
    t_star: float


def run_compare(cfg: ExperimentConfig) -> CompareResult:
    fxt = run_simulate(cfg, use_psi=True)
    base = run_simulate(cfg, use_psi=False)
    u_star = cfg.u_star
    return CompareResult(
        fxt=fxt,
        baseline=base,
        u_star=u_star,
        nu=cfg.nu,
        settle_fxt=settling_time(fxt, u_star, cfg.nu),
        settle_baseline=settling_time(base, u_star, cfg.nu),
        t_star=cfg.t_star,
    )


def sample_shell_points(
    u_star: np.ndarray,
    n_samples: int,
    r_min: float,
    r_max: float,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Random points with log-uniform distance from u_star in [r_min, r_max].

    Returns (points, distances); directions uniform on the sphere.
    """
    rng = np.random.default_rng(seed)
    n_dim = u_star.shape[0]
    r = 10.0 ** rng.uniform(np.log10(r_min), np.log10(r_max), n_samples)
    v = rng.normal(size=(n_samples, n_dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return u_star[None, :] + r[:, None] * v, r


@dataclass
class SweepResult:
    """Settling times of the seeking flow vs the baseline over random ICs.

    Entries are +inf when a trajectory did not settle by the horizon.
    """

    r: np.ndarray
    z0: np.ndarray
    settle_fxt: np.ndarray
    settle_baseline: np.ndarray
    nu: float


def run_sweep(
    game: QuadraticGame,
    params: FxtnesParams,
    n_samples: int = 100,
    r_min: float = 1.0,
    r_max: float = 1e3,
    seed: int = 0,
    t_end: float = 6.0,
    nu: float = 1e-3,
    step: float | None = None,
    substep_cap: float = DEFAULT_SUBSTEP_CAP,
    backend: str = "auto",
) -> SweepResult:
    """Random-IC settling sweep of the reduced seeking and baseline flows."""
    u_star = game.nash_equilibrium()
    z0s, r = sample_shell_points(u_star, n_samples, r_min, r_max, seed)
    a1, a2 = params.alphas
    h = step if step is not None else default_step_smooth(params.eps1)
    validate_step_smooth(h, params.eps1)
    integ = IntegratorConfig(
        step=h, t_end=t_end, record_stride=1, substep_cap=substep_cap
    )

    def worker(idx: int) -> tuple[float, float]:
        out = []
        for use_psi in (True, False):
            traj = integrate_reduced(
                game, params.k, a1, a2, params.sing_tol, z0s[idx], integ,
                use_psi=use_psi, backend=backend,
            )
            s = settling_time(traj, u_star, nu)
            out.append(np.inf if s is None else s)
        return out[0], out[1]

    with ThreadPoolExecutor(max_workers=_n_workers()) as pool:
        results = list(pool.map(worker, range(n_samples)))

    settle_fxt = np.array([a for a, _ in results])
    settle_base = np.array([b for _, b in results])
    return SweepResult(
        r=r, z0=z0s, settle_fxt=settle_fxt, settle_baseline=settle_base, nu=nu
    )


@dataclass
class ReachableResult:
    """Envelopes of the seeking and baseline flows from a grid of ICs."""

    fxt: Envelope
    baseline: Envelope
    points: np.ndarray
    u_star: np.ndarray


def run_reachable(cfg: ExperimentConfig) -> ReachableResult:
    if not cfg.grid:
        raise ConfigError("reachable requires an experiment.grid section")
    points = grid_points(cfg.grid)
    u_star = cfg.u_star
    a1, a2 = cfg.params.alphas

    if cfg.flow == "full":
        integ = _full_integrator_config(cfg)

        def worker(args) -> Trajectory:
            z0, use_psi = args
            return integrate_full(
                cfg.game, cfg.graph, cfg.params, integ, z0, cfg.x0,
                use_psi=use_psi, backend=cfg.backend,
            )
    else:
        integ = _smooth_integrator_config(cfg, cfg.params.eps1, DEFAULT_SUBSTEP_CAP)

        def worker(args) -> Trajectory:
            z0, use_psi = args
            return integrate_reduced(
                cfg.game, cfg.params.k, a1, a2, cfg.params.sing_tol, z0, integ,
                use_psi=use_psi, backend=cfg.backend,
            )

    with ThreadPoolExecutor(max_workers=_n_workers()) as pool:
        fxt_trajs = list(pool.map(worker, ((p, True) for p in points)))
        base_trajs = list(pool.map(worker, ((p, False) for p in points)))

    return ReachableResult(
        fxt=reachable_envelope(fxt_trajs, u_star),
        baseline=reachable_envelope(base_trajs, u_star),
        points=points,
        u_star=u_star,
    )
