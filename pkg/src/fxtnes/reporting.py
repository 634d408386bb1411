"""CSV and plain-text emission for experiment results.

All floats are written with 17 significant digits so that re-reading a
file reproduces the binary values exactly; every CSV starts with a single
'#' comment line carrying the resolved parameter set.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np

from .analysis import Envelope, distances_to
from .config import ExperimentConfig
from .experiments import CompareResult, ReachableResult, SweepResult
from .integrator import Trajectory


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def params_comment(cfg: ExperimentConfig) -> str:
    p = cfg.params
    a1, a2 = p.alphas
    fields = [
        f"k={fmt(p.k)}",
        f"alpha1={fmt(a1)}",
        f"alpha2={fmt(a2)}",
        f"q1={fmt(p.q1)}",
        f"q2={fmt(p.q2)}",
        f"kappa={fmt(cfg.kappa)}",
        f"t_star={fmt(cfg.t_star)}",
        f"regime={cfg.regime.value}",
        f"a={','.join(fmt(v) for v in p.a)}",
        f"eps1={fmt(p.eps1)}",
        f"eps2={fmt(p.eps2)}",
        f"kappa_tilde={','.join(str(v) for v in p.kappa_tilde)}",
        f"sing_tol={fmt(p.sing_tol)}",
        f"nu={fmt(cfg.nu)}",
    ]
    return "# " + " ".join(fields)


def write_trajectory_csv(
    path: str | Path,
    traj: Trajectory,
    u_star: np.ndarray,
    comment: str,
    v: np.ndarray | None = None,
) -> None:
    """Rows t, u_1..u_N, uhat_1..uhat_N, dist_to_eq and optionally V.

    For flows without a dither (reduced, average) the actions equal the
    nominal actions and both column groups repeat the same values.
    """
    u = traj.actions if traj.actions is not None else traj.states
    n = u_star.shape[0]
    uhat = traj.states[:, :n]
    dist = distances_to(traj, u_star)
    header = (
        ["t"]
        + [f"u_{i + 1}" for i in range(n)]
        + [f"uhat_{i + 1}" for i in range(n)]
        + ["dist_to_eq"]
    )
    if v is not None:
        header.append("V")
    lines = [comment, ",".join(header)]
    for j in range(len(traj)):
        row = [fmt(traj.times[j])]
        row += [fmt(val) for val in u[j, :n]]
        row += [fmt(val) for val in uhat[j]]
        row.append(fmt(dist[j]))
        if v is not None:
            row.append(fmt(v[j]))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_envelope_csv(path: str | Path, env: Envelope, comment: str) -> None:
    d = env.coord_min.shape[1]
    header = ["t"]
    for i in range(d):
        header += [f"min_{i + 1}", f"max_{i + 1}"]
    if env.dist_min is not None:
        header += ["dist_min", "dist_max"]
    lines = [comment, ",".join(header)]
    for j in range(env.times.shape[0]):
        row = [fmt(env.times[j])]
        for i in range(d):
            row += [fmt(env.coord_min[j, i]), fmt(env.coord_max[j, i])]
        if env.dist_min is not None:
            row += [fmt(env.dist_min[j]), fmt(env.dist_max[j])]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sweep_csv(path: str | Path, sweep: SweepResult, comment: str) -> None:
    lines = [comment, "r0,settle_fxt,settle_baseline"]
    order = np.argsort(sweep.r)
    for idx in order:
        lines.append(
            ",".join(
                [
                    fmt(sweep.r[idx]),
                    fmt(sweep.settle_fxt[idx]),
                    fmt(sweep.settle_baseline[idx]),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def settle_str(value: float | None) -> str:
    if value is None or not np.isfinite(value):
        return "not settled"
    return fmt(value)


def compare_summary(res: CompareResult) -> str:
    lines = [
        "comparison summary",
        f"  t_star bound: {fmt(res.t_star)}",
        f"  nu: {fmt(res.nu)}",
        f"  u_star: {' '.join(fmt(v) for v in res.u_star)}",
        f"  settling (seeking): {settle_str(res.settle_fxt)}",
        f"  settling (baseline): {settle_str(res.settle_baseline)}",
        f"  final dist (seeking): {fmt(distances_to(res.fxt, res.u_star)[-1])}",
        f"  final dist (baseline): {fmt(distances_to(res.baseline, res.u_star)[-1])}",
    ]
    return "\n".join(lines)


def reachable_summary(res: ReachableResult, nu: float, t_star: float) -> str:
    def band_after(env: Envelope) -> float:
        mask = env.times >= t_star
        if not np.any(mask) or env.dist_max is None:
            return float("nan")
        return float(env.dist_max[mask].max())

    lines = [
        "reachable summary",
        f"  grid points: {res.points.shape[0]}",
        f"  t_star: {fmt(t_star)}",
        f"  max dist after t_star (seeking): {fmt(band_after(res.fxt))}",
        f"  max dist after t_star (baseline): {fmt(band_after(res.baseline))}",
    ]
    return "\n".join(lines)
