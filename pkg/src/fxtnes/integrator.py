"""Fixed-step RK4 integration with a shared record grid.

Record times are T_j = j * (step * record_stride), so independent runs of
different flows land on identical grids and can be compared sample by
sample. Between records the driver either takes exactly `record_stride`
fixed steps, or, when `substep_cap` is set, shrinks individual steps so
that no single update moves the state by more than roughly the cap. The
cap rule is deterministic (a function of the current state only), keeping
runs bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import IntegrationError, ParameterError
from .dynamics import FxtnesParams

TARGET_SAMPLES = 5000


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, horizon, recording cadence, and optional substep cap."""

    step: float
    t_end: float
    record_stride: int = 1
    substep_cap: float | None = None

    def __post_init__(self):
        if not self.step > 0:
            raise ParameterError(f"step must be positive, got {self.step}")
        if not self.t_end > 0:
            raise ParameterError(f"t_end must be positive, got {self.t_end}")
        if self.record_stride < 1:
            raise ParameterError("record_stride must be a positive integer")
        if self.substep_cap is not None and not self.substep_cap > 0:
            raise ParameterError("substep_cap must be positive when given")

    @property
    def record_dt(self) -> float:
        return self.step * self.record_stride

    @property
    def n_records(self) -> int:
        """Number of record intervals; samples = n_records + 1 incl. t=0."""
        return max(1, math.ceil(self.t_end / self.record_dt - 1e-9))


@dataclass
class Trajectory:
    """Recorded simulation output on the shared grid."""

    times: np.ndarray
    states: np.ndarray
    actions: np.ndarray | None = None
    monitors: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.times.shape[0]


def rk4_step(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    y: np.ndarray,
    h: float,
) -> np.ndarray:
    """One classical Runge-Kutta step of size h."""
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    config: IntegratorConfig,
    monitors: Mapping[str, Callable[[float, np.ndarray], float]] | None = None,
) -> Trajectory:
    """Integrate y' = rhs(t, y) to t_end, recording every record interval.

    Monitors are scalar functions evaluated at record times only, never at
    stage points.
    """
    y = np.array(y0, dtype=float).ravel()
    h = config.step
    stride = config.record_stride
    cap = config.substep_cap
    rec_dt = config.record_dt
    n_rec = config.n_records

    times = np.arange(n_rec + 1, dtype=float) * rec_dt
    states = np.empty((n_rec + 1, y.shape[0]))
    states[0] = y
    mon_fns = dict(monitors or {})
    mon_vals = {name: np.empty(n_rec + 1) for name in mon_fns}
    for name, fn in mon_fns.items():
        mon_vals[name][0] = fn(0.0, y)

    if cap is None:
        step_index = 0
        for j in range(1, n_rec + 1):
            for _ in range(stride):
                y = rk4_step(rhs, step_index * h, y, h)
                step_index += 1
            if not np.all(np.isfinite(y)):
                raise IntegrationError(
                    f"non-finite state at t = {step_index * h:.6g} "
                    f"(step too large or singular region)",
                    t=step_index * h,
                )
            states[j] = y
            for name, fn in mon_fns.items():
                mon_vals[name][j] = fn(times[j], y)
    else:
        dt_floor = h * 1e-12
        for j in range(1, n_rec + 1):
            t_base = times[j - 1]
            t_next = times[j]
            acc = 0.0
            while True:
                t = t_base + acc
                remaining = t_next - t
                if remaining <= dt_floor:
                    break
                k1 = rhs(t, y)
                speed = float(np.sqrt(k1 @ k1))
                if not np.isfinite(speed):
                    raise IntegrationError(
                        f"non-finite derivative at t = {t:.6g}", t=t
                    )
                dt = min(h, remaining)
                if speed > 0.0:
                    dt = min(dt, cap / speed)
                if dt < dt_floor:
                    raise IntegrationError(
                        f"substep collapsed below {dt_floor:.3e} at "
                        f"t = {t:.6g} (derivative magnitude {speed:.3e})",
                        t=t,
                    )
                k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
                k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
                k4 = rhs(t + dt, y + dt * k3)
                y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                acc += dt
            if not np.all(np.isfinite(y)):
                raise IntegrationError(
                    f"non-finite state at t = {t_next:.6g}", t=t_next
                )
            states[j] = y
            for name, fn in mon_fns.items():
                mon_vals[name][j] = fn(times[j], y)

    return Trajectory(times=times, states=states, monitors=mon_vals)


def default_step_full(params: FxtnesParams) -> float:
    """Default h for the probe-modulated loop: eps2/(50 max kappa_tilde)."""
    kt_max = max(float(v) for v in params.kappa_tilde)
    return params.eps2 / (50.0 * kt_max)


def default_step_smooth(eps1: float) -> float:
    """Default h for probe-free flows: min(eps1/20, 1e-3)."""
    return min(eps1 / 20.0, 1e-3)


def validate_step_full(step: float, params: FxtnesParams) -> None:
    """Probe-resolving constraint: h <= min(eps1/20, eps2/(20 max kt))."""
    kt_max = max(float(v) for v in params.kappa_tilde)
    limit = min(params.eps1 / 20.0, params.eps2 / (20.0 * kt_max))
    if step > limit * (1.0 + 1e-12):
        raise ParameterError(
            f"step {step:.3e} too large for the probe-modulated system; "
            f"need h <= {limit:.3e}"
        )


def validate_step_smooth(step: float, eps1: float) -> None:
    """Probe-free constraint: h <= min(eps1/20, 1e-2)."""
    limit = min(eps1 / 20.0, 1e-2)
    if step > limit * (1.0 + 1e-12):
        raise ParameterError(
            f"step {step:.3e} too large for the probe-free flows; "
            f"need h <= {limit:.3e}"
        )


def default_record_stride(step: float, t_end: float, target: int = TARGET_SAMPLES) -> int:
    """Stride giving roughly `target` recorded samples."""
    n_steps = max(1, math.ceil(t_end / step - 1e-9))
    return max(1, n_steps // target)
