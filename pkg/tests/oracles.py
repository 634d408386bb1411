"""Independent oracles used to cross-check package results.

Everything here is deliberately computed with methods different from the
implementations under test: power iteration instead of Jacobi sweeps,
finite differences instead of closed-form gradients, matrix exponentials
instead of RK4 time stepping.
"""

from __future__ import annotations

import numpy as np


def power_max_eigenvalue(a: np.ndarray, iters: int = 20_000, seed: int = 7) -> float:
    """Largest-magnitude eigenvalue of a symmetric matrix by power iteration."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=a.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = a @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam = float(v @ a @ v)
    return lam


def symmetric_eigen_range(a: np.ndarray) -> tuple[float, float]:
    """(min, max) eigenvalue of a symmetric matrix via shifted power iteration.

    First find the dominant magnitude mu, then power-iterate a - mu*I and
    a + mu*I to pin down both ends of the spectrum.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    mu = abs(power_max_eigenvalue(a))
    if mu == 0.0:
        return 0.0, 0.0
    low = power_max_eigenvalue(a - mu * np.eye(n)) + mu
    high = power_max_eigenvalue(a + mu * np.eye(n)) - mu
    return min(low, high), max(low, high)


def fd_gradient(f, u: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    u = np.asarray(u, dtype=float)
    g = np.zeros_like(u)
    for i in range(u.shape[0]):
        up = u.copy()
        dn = u.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (f(up) - f(dn)) / (2.0 * h)
    return g


def brute_quadratic_cost(q_i: np.ndarray, b_i: np.ndarray, c_i: float, u: np.ndarray) -> float:
    """Cost evaluated as an explicit double sum, no vectorized products."""
    n = u.shape[0]
    total = float(c_i)
    for j in range(n):
        total += float(b_i[j]) * float(u[j])
        for k in range(n):
            total += float(u[j]) * float(q_i[j, k]) * float(u[k])
    return total


def linear_ode_solution(a: np.ndarray, y0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Exact solution of dy/dt = a y + const-free linear flow via expm."""
    from scipy.linalg import expm

    out = np.empty((times.shape[0], y0.shape[0]))
    for j, t in enumerate(times):
        out[j] = expm(a * t) @ y0
    return out


def affine_ode_solution(
    a: np.ndarray, b: np.ndarray, y0: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """Exact solution of dy/dt = a y + b using the fixed point a^-1 b."""
    from scipy.linalg import expm

    fixed = np.linalg.solve(a, -b)
    out = np.empty((times.shape[0], y0.shape[0]))
    for j, t in enumerate(times):
        out[j] = fixed + expm(a * t) @ (y0 - fixed)
    return out


def comparison_ode_extinction(
    scale: float,
    pairs: list[tuple[float, float]],
    v0: float,
    t_max: float,
    n_steps: int = 4_000_000,
) -> float:
    """Extinction time of dv/dt = -scale * sum(c * v^g) by explicit Euler.

    Returns the first grid time at which v reaches zero (clamped), or
    t_max if it never does. Used to sanity-check settling-bound formulas:
    the analytic fixed-time bound must upper-bound this for any v0.
    """
    dt = t_max / n_steps
    v = float(v0)
    for j in range(n_steps):
        if v <= 0.0:
            return j * dt
        rate = -scale * sum(c * v**g for c, g in pairs)
        v = v + dt * rate
    return t_max
