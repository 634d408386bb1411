"""Compiled kernels against the generic driver: parity and failure modes."""

from __future__ import annotations

import numpy as np
import pytest

from fxtnes.dynamics import FxtnesParams, make_full_rhs, make_reduced_rhs
from fxtnes.errors import IntegrationError
from fxtnes.fastpath import run_es_fast, run_reduced_fast
from fxtnes.graph import complete_graph
from fxtnes.integrator import IntegratorConfig, simulate
from fxtnes.presets import benchmark_params, seeking_game


def loop_params(**over):
    """Benchmark tuning with a slower probe so generic runs stay cheap."""
    base = dict(
        k=1.0,
        q1=3.0,
        q2=1.5,
        a=np.full(3, 0.1),
        eps1=5e-2,
        eps2=1e-2,
        kappa_tilde=(2, 3, 5),
    )
    base.update(over)
    return FxtnesParams(**base)


@pytest.mark.parametrize("use_psi", [True, False], ids=["fxt", "baseline"])
def test_full_loop_parity_with_generic(warm_kernels, use_psi):
    game = seeking_game()
    graph = complete_graph(3)
    p = loop_params()
    cfg = IntegratorConfig(step=2e-5, t_end=0.02, record_stride=100)
    rng = np.random.default_rng(0)
    u0 = rng.normal(size=3)
    x0 = rng.normal(size=(3, 3))

    fast = run_es_fast(game, graph, p, cfg, u0, x0, use_psi=use_psi)
    slow = simulate(
        make_full_rhs(game, graph, p, use_psi=use_psi),
        np.concatenate([u0, x0.ravel()]),
        cfg,
    )
    assert np.array_equal(fast.times, slow.times)
    assert np.max(np.abs(fast.states - slow.states)) <= 1e-11


def test_full_loop_parity_with_phases(warm_kernels):
    p = loop_params(phases0=np.array([0.3, 1.1, 2.9]), a=np.array([0.1, 0.2, 0.3]))
    game = seeking_game()
    graph = complete_graph(3)
    cfg = IntegratorConfig(step=2e-5, t_end=0.01, record_stride=50)
    u0 = np.array([1.0, -1.0, 0.5])
    x0 = np.zeros((3, 3))
    fast = run_es_fast(game, graph, p, cfg, u0, x0)
    slow = simulate(make_full_rhs(game, graph, p), np.concatenate([u0, x0.ravel()]), cfg)
    assert np.max(np.abs(fast.states - slow.states)) <= 1e-11


@pytest.mark.parametrize(
    "cap,z0",
    [
        (None, np.array([1.0, 2.0, 3.0])),  # near field: fixed step is stable
        (0.1, np.array([-15.0, 10.0, 5.0])),  # far field needs the cap
    ],
    ids=["fixed", "capped"],
)
def test_reduced_parity_with_generic(warm_kernels, cap, z0):
    game = seeking_game()
    m, mv = game.pseudo_gradient_affine()
    cfg = IntegratorConfig(step=1e-3, t_end=2.0, record_stride=10, substep_cap=cap)

    fast = run_reduced_fast(m, mv, 1.0, 0.5, -1.0, 1e-9, z0, cfg)
    slow = simulate(make_reduced_rhs(game, 1.0, 0.5, -1.0, 1e-9), z0, cfg)
    assert np.array_equal(fast.times, slow.times)
    scale = np.maximum(1.0, np.abs(slow.states))
    assert np.max(np.abs(fast.states - slow.states) / scale) <= 1e-6


def test_reduced_baseline_parity(warm_kernels):
    game = seeking_game()
    m, mv = game.pseudo_gradient_affine()
    cfg = IntegratorConfig(step=1e-3, t_end=1.0, record_stride=10)
    z0 = np.array([3.0, -2.0, 7.0])
    fast = run_reduced_fast(m, mv, 1.0, 0.5, -1.0, 1e-9, z0, cfg, use_psi=False)
    slow = simulate(
        make_reduced_rhs(game, 1.0, 0.5, -1.0, 1e-9, use_psi=False), z0, cfg
    )
    assert np.max(np.abs(fast.states - slow.states)) <= 1e-10


def test_fast_runs_are_bit_reproducible(warm_kernels):
    game = seeking_game()
    graph = complete_graph(3)
    p = loop_params()
    cfg = IntegratorConfig(step=2e-5, t_end=0.01, record_stride=100)
    a = run_es_fast(game, graph, p, cfg, np.zeros(3), np.zeros((3, 3)))
    b = run_es_fast(game, graph, p, cfg, np.zeros(3), np.zeros((3, 3)))
    assert np.array_equal(a.states, b.states)

    m, mv = game.pseudo_gradient_affine()
    rcfg = IntegratorConfig(step=1e-3, t_end=1.0, record_stride=10, substep_cap=0.1)
    ra = run_reduced_fast(m, mv, 1.0, 0.5, -1.0, 1e-9, np.array([9.0, 9.0, 9.0]), rcfg)
    rb = run_reduced_fast(m, mv, 1.0, 0.5, -1.0, 1e-9, np.array([9.0, 9.0, 9.0]), rcfg)
    assert np.array_equal(ra.states, rb.states)


def test_es_kernel_rejects_substep_cap(warm_kernels):
    cfg = IntegratorConfig(step=1e-5, t_end=1e-3, substep_cap=0.1)
    with pytest.raises(IntegrationError, match="fixed-step only"):
        run_es_fast(
            seeking_game(), complete_graph(3), benchmark_params(), cfg,
            np.zeros(3), np.zeros((3, 3)),
        )


def test_es_kernel_reports_nonfinite(warm_kernels):
    """The anti-monotone orientation diverges; the kernel must say where."""
    game = seeking_game().negated()  # printed orientation: repulsive field
    graph = complete_graph(3)
    p = loop_params(k=50.0)
    cfg = IntegratorConfig(step=2e-4, t_end=4.0, record_stride=100)
    with pytest.raises(IntegrationError, match="non-finite"):
        run_es_fast(game, graph, p, cfg, np.full(3, 100.0), np.full((3, 3), 100.0))


def test_reduced_kernel_reports_collapse(warm_kernels):
    """cap far below speed * dt_floor trips the deterministic floor."""
    m = np.zeros((3, 3))
    mv = np.array([1.0, 0.0, 0.0])  # constant unit-speed field
    cfg = IntegratorConfig(step=0.1, t_end=1.0, substep_cap=1e-30)
    with pytest.raises(IntegrationError, match="collapsed"):
        run_reduced_fast(m, mv, 1.0, 0.5, -1.0, 0.0, np.zeros(3), cfg, use_psi=False)
