"""Compiled inner loops for quadratic games.

The generic driver in `integrator.simulate` handles arbitrary cost oracles;
these kernels replicate its arithmetic for quadratic games so that the
probe-resolving step sizes (tens of millions of RK4 steps) and the random
sweeps finish in seconds. Compilation is lazy and cached on disk; the
kernels release the GIL so independent trajectories can run on threads.

Parity between this path and the generic one is covered by tests; the two
record grids are constructed with identical float arithmetic.
"""

from __future__ import annotations

import numpy as np

from .dynamics import FxtnesParams
from .errors import IntegrationError
from .game import QuadraticGame
from .graph import CommGraph, complete_graph, require_connected
from .integrator import IntegratorConfig, Trajectory

_kernels: dict | None = None

STATUS_OK = 0
STATUS_NONFINITE = -1
STATUS_COLLAPSED = -2


def _build_kernels() -> dict:
    from numba import njit

    @njit(cache=True, nogil=True, inline="always")
    def _es_rhs(t, uh, x, du, dx, phases0, rates, q, b, c, lap,
                k, alpha1, alpha2, a, eps1, sing_tol, use_psi, u, mu):
        n = uh.shape[0]
        for i in range(n):
            mu[i] = np.cos(phases0[i] + rates[i] * t)
            u[i] = uh[i] + a[i] * mu[i]
        for i in range(n):
            if use_psi:
                s = 0.0
                for j in range(n):
                    s += x[i, j] * x[i, j]
                if np.sqrt(s) <= sing_tol:
                    du[i] = 0.0
                else:
                    du[i] = -k * x[i, i] * (s ** (-0.5 * alpha1) + s ** (-0.5 * alpha2))
            else:
                du[i] = -k * x[i, i]
        for i in range(n):
            # J_i(u) = u^T Q_i u + b_i^T u + c_i, evaluated from raw cost data
            acc = c[i]
            for r in range(n):
                qr = 0.0
                for s_ in range(n):
                    qr += q[i, r, s_] * u[s_]
                acc += u[r] * qr + b[i, r] * u[r]
            for j in range(n):
                lx = 0.0
                for kk in range(n):
                    lx += lap[i, kk] * x[kk, j]
                dx[i, j] = -lx
            dx[i, i] += (2.0 / a[i]) * acc * mu[i] - x[i, i]
            for j in range(n):
                dx[i, j] /= eps1

    @njit(cache=True, nogil=True)
    def es_loop(uh0, x0, phases0, rates, q, b, c, lap, k, alpha1, alpha2,
                a, eps1, sing_tol, use_psi, h, n_rec, stride,
                rec_uh, rec_x, info):
        n = uh0.shape[0]
        uh = uh0.copy()
        x = x0.copy()
        u = np.empty(n)
        mu = np.empty(n)
        k1u = np.empty(n); k1x = np.empty((n, n))
        k2u = np.empty(n); k2x = np.empty((n, n))
        k3u = np.empty(n); k3x = np.empty((n, n))
        k4u = np.empty(n); k4x = np.empty((n, n))
        tu = np.empty(n); tx = np.empty((n, n))
        rec_uh[0, :] = uh
        rec_x[0, :, :] = x
        step_index = 0
        for j in range(1, n_rec + 1):
            for _ in range(stride):
                t = step_index * h
                _es_rhs(t, uh, x, k1u, k1x, phases0, rates, q, b, c, lap,
                        k, alpha1, alpha2, a, eps1, sing_tol, use_psi, u, mu)
                for i in range(n):
                    tu[i] = uh[i] + 0.5 * h * k1u[i]
                    for jj in range(n):
                        tx[i, jj] = x[i, jj] + 0.5 * h * k1x[i, jj]
                _es_rhs(t + 0.5 * h, tu, tx, k2u, k2x, phases0, rates, q, b, c, lap,
                        k, alpha1, alpha2, a, eps1, sing_tol, use_psi, u, mu)
                for i in range(n):
                    tu[i] = uh[i] + 0.5 * h * k2u[i]
                    for jj in range(n):
                        tx[i, jj] = x[i, jj] + 0.5 * h * k2x[i, jj]
                _es_rhs(t + 0.5 * h, tu, tx, k3u, k3x, phases0, rates, q, b, c, lap,
                        k, alpha1, alpha2, a, eps1, sing_tol, use_psi, u, mu)
                for i in range(n):
                    tu[i] = uh[i] + h * k3u[i]
                    for jj in range(n):
                        tx[i, jj] = x[i, jj] + h * k3x[i, jj]
                _es_rhs(t + h, tu, tx, k4u, k4x, phases0, rates, q, b, c, lap,
                        k, alpha1, alpha2, a, eps1, sing_tol, use_psi, u, mu)
                for i in range(n):
                    uh[i] += (h / 6.0) * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i])
                    for jj in range(n):
                        x[i, jj] += (h / 6.0) * (k1x[i, jj] + 2.0 * k2x[i, jj]
                                                 + 2.0 * k3x[i, jj] + k4x[i, jj])
                step_index += 1
            finite = True
            for i in range(n):
                if not np.isfinite(uh[i]):
                    finite = False
                for jj in range(n):
                    if not np.isfinite(x[i, jj]):
                        finite = False
            if not finite:
                info[0] = step_index * h
                return STATUS_NONFINITE
            rec_uh[j, :] = uh
            rec_x[j, :, :] = x
        return STATUS_OK

    @njit(cache=True, nogil=True, inline="always")
    def _affine_rhs(z, m, mv, k, alpha1, alpha2, sing_tol, use_psi, out):
        n = z.shape[0]
        s = 0.0
        for i in range(n):
            g = mv[i]
            for j in range(n):
                g += m[i, j] * z[j]
            out[i] = g
            s += g * g
        if use_psi:
            if np.sqrt(s) <= sing_tol:
                for i in range(n):
                    out[i] = 0.0
            else:
                scale = -k * (s ** (-0.5 * alpha1) + s ** (-0.5 * alpha2))
                for i in range(n):
                    out[i] *= scale
        else:
            for i in range(n):
                out[i] *= -k

    @njit(cache=True, nogil=True)
    def reduced_loop(z0, m, mv, k, alpha1, alpha2, sing_tol, use_psi,
                     h, n_rec, stride, cap, rec_z, info):
        n = z0.shape[0]
        z = z0.copy()
        k1 = np.empty(n); k2 = np.empty(n); k3 = np.empty(n); k4 = np.empty(n)
        tz = np.empty(n)
        rec_dt = h * stride
        dt_floor = h * 1e-12
        rec_z[0, :] = z
        for j in range(1, n_rec + 1):
            t_base = (j - 1) * rec_dt
            t_next = j * rec_dt
            acc = 0.0
            while True:
                t = t_base + acc
                remaining = t_next - t
                if remaining <= dt_floor:
                    break
                _affine_rhs(z, m, mv, k, alpha1, alpha2, sing_tol, use_psi, k1)
                speed = 0.0
                for i in range(n):
                    speed += k1[i] * k1[i]
                speed = np.sqrt(speed)
                if not np.isfinite(speed):
                    info[0] = t
                    return STATUS_NONFINITE
                dt = min(h, remaining)
                if speed > 0.0:
                    dt = min(dt, cap / speed)
                if dt < dt_floor:
                    info[0] = t
                    return STATUS_COLLAPSED
                for i in range(n):
                    tz[i] = z[i] + 0.5 * dt * k1[i]
                _affine_rhs(tz, m, mv, k, alpha1, alpha2, sing_tol, use_psi, k2)
                for i in range(n):
                    tz[i] = z[i] + 0.5 * dt * k2[i]
                _affine_rhs(tz, m, mv, k, alpha1, alpha2, sing_tol, use_psi, k3)
                for i in range(n):
                    tz[i] = z[i] + dt * k3[i]
                _affine_rhs(tz, m, mv, k, alpha1, alpha2, sing_tol, use_psi, k4)
                for i in range(n):
                    z[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                acc += dt
            finite = True
            for i in range(n):
                if not np.isfinite(z[i]):
                    finite = False
            if not finite:
                info[0] = t_next
                return STATUS_NONFINITE
            rec_z[j, :] = z
        return STATUS_OK

    return {"es_loop": es_loop, "reduced_loop": reduced_loop}


def kernels() -> dict:
    global _kernels
    if _kernels is None:
        _kernels = _build_kernels()
    return _kernels


def _raise_status(status: int, info: np.ndarray) -> None:
    if status == STATUS_NONFINITE:
        raise IntegrationError(
            f"non-finite state at t = {info[0]:.6g} "
            f"(step too large or singular region)",
            t=float(info[0]),
        )
    if status == STATUS_COLLAPSED:
        raise IntegrationError(
            f"substep collapsed at t = {info[0]:.6g} "
            f"(derivative blow-up)",
            t=float(info[0]),
        )


def run_es_fast(
    game: QuadraticGame,
    graph: CommGraph,
    params: FxtnesParams,
    config: IntegratorConfig,
    u_hat0: np.ndarray,
    x0: np.ndarray,
    use_psi: bool = True,
) -> Trajectory:
    """Compiled equivalent of simulate(make_full_rhs(...), ...) (fixed step)."""
    require_connected(graph)
    if config.substep_cap is not None:
        raise IntegrationError(
            "the probe-modulated kernel is fixed-step only; substep_cap "
            "applies to the probe-free flows"
        )
    n = params.n_players
    n_rec = config.n_records
    rec_uh = np.empty((n_rec + 1, n))
    rec_x = np.empty((n_rec + 1, n, n))
    info = np.zeros(1)
    status = kernels()["es_loop"](
        np.asarray(u_hat0, dtype=float).copy(),
        np.asarray(x0, dtype=float).copy(),
        params.phases0.astype(float),
        params.probe_rates,
        np.ascontiguousarray(game.Q),
        np.ascontiguousarray(game.b),
        np.ascontiguousarray(game.c),
        graph.laplacian(),
        float(params.k),
        *map(float, params.alphas),
        params.a.astype(float),
        float(params.eps1),
        float(params.sing_tol),
        bool(use_psi),
        float(config.step),
        n_rec,
        int(config.record_stride),
        rec_uh,
        rec_x,
        info,
    )
    _raise_status(int(status), info)
    times = np.arange(n_rec + 1, dtype=float) * config.record_dt
    states = np.concatenate([rec_uh, rec_x.reshape(n_rec + 1, n * n)], axis=1)
    return Trajectory(times=times, states=states)


def run_reduced_fast(
    m: np.ndarray,
    mv: np.ndarray,
    k: float,
    alpha1: float,
    alpha2: float,
    sing_tol: float,
    z0: np.ndarray,
    config: IntegratorConfig,
    use_psi: bool = True,
) -> Trajectory:
    """Compiled equivalent of simulate over an affine pseudo-gradient flow."""
    n_rec = config.n_records
    n = np.asarray(z0).shape[0]
    rec_z = np.empty((n_rec + 1, n))
    info = np.zeros(1)
    cap = config.substep_cap if config.substep_cap is not None else 1e300
    status = kernels()["reduced_loop"](
        np.asarray(z0, dtype=float).copy(),
        np.ascontiguousarray(m, dtype=float),
        np.ascontiguousarray(mv, dtype=float),
        float(k),
        float(alpha1),
        float(alpha2),
        float(sing_tol),
        bool(use_psi),
        float(config.step),
        n_rec,
        int(config.record_stride),
        float(cap),
        rec_z,
        info,
    )
    _raise_status(int(status), info)
    times = np.arange(n_rec + 1, dtype=float) * config.record_dt
    return Trajectory(times=times, states=rec_z)


def warm_up() -> None:
    """Trigger (or load from cache) kernel compilation with tiny runs."""
    from .presets import three_player_game, benchmark_params

    game = three_player_game().negated()
    params = benchmark_params()
    m, mv = game.pseudo_gradient_affine()
    cfg = IntegratorConfig(step=1e-7, t_end=5e-7, record_stride=1)
    run_es_fast(game, complete_graph(3), params, cfg, np.zeros(3), np.zeros((3, 3)))
    rcfg = IntegratorConfig(step=1e-3, t_end=2e-3, record_stride=1, substep_cap=0.1)
    a1, a2 = params.alphas
    run_reduced_fast(m, mv, params.k, a1, a2, params.sing_tol, np.zeros(3), rcfg)
