"""Command-line surface: config in, CSVs and summaries out.

Exit codes: 0 success, 2 validation failure (game/graph/parameter/config),
3 integration abort (non-finite state).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .analysis import per_player_distances, probe_average_check, settling_time
from .config import ExperimentConfig, load_config
from .errors import FxtnesError, IntegrationError
from .game import classify
from .reporting import (
    compare_summary,
    fmt,
    params_comment,
    reachable_summary,
    settle_str,
    write_envelope_csv,
    write_sweep_csv,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INTEGRATION = 3


def _out_dir(cfg: ExperimentConfig, args) -> Path:
    out = Path(args.out) if args.out else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_check_game(cfg: ExperimentConfig, args) -> int:
    game = cfg.game
    cls = classify(game)
    rev = classify(game.negated())
    u_star = game.nash_equilibrium()
    m, mv = game.pseudo_gradient_affine()
    residual = float(np.linalg.norm(m @ u_star + mv))
    print(f"players: {game.n_players}")
    print(f"kind: {cls.kind.value}")
    print(f"monotonicity_modulus: {fmt(cls.monotonicity_modulus)}")
    print(f"pl_modulus: {fmt(cls.pl_modulus) if cls.pl_modulus is not None else 'none'}")
    print(f"reversed_kind: {rev.kind.value}")
    print(f"reversed_modulus: {fmt(rev.monotonicity_modulus)}")
    print(f"u_star: {' '.join(fmt(v) for v in u_star)}")
    print(f"equilibrium_residual: {fmt(residual)}")
    print(f"kappa: {fmt(cfg.kappa)}")
    print(f"t_star: {fmt(cfg.t_star)} ({cfg.regime.value})")
    return EXIT_OK


def _cmd_probe_check(cfg: ExperimentConfig, args) -> int:
    report = probe_average_check(cfg.params.kappa_tilde)
    print(f"kappa_tilde: {','.join(str(v) for v in cfg.params.kappa_tilde)}")
    print(f"common_period: {report.period}")
    print(f"n_points: {report.n_points}")
    print(f"max_mean_abs: {fmt(report.max_mean_abs)}")
    print(f"max_second_moment_err: {fmt(report.max_second_moment_err)}")
    return EXIT_OK


def _write_full_run(cfg: ExperimentConfig, args, use_psi: bool, name: str) -> int:
    from .experiments import run_simulate

    traj = run_simulate(cfg, use_psi=use_psi)
    out = _out_dir(cfg, args)
    path = out / f"{name}.csv"
    write_trajectory_csv(path, traj, cfg.u_star, params_comment(cfg))
    settle = settling_time(traj, cfg.u_star, cfg.nu)
    print(f"wrote {path}")
    print(f"settling (nu={fmt(cfg.nu)}): {settle_str(settle)}")
    return EXIT_OK


def _cmd_simulate(cfg: ExperimentConfig, args) -> int:
    return _write_full_run(cfg, args, True, "simulate")


def _cmd_baseline(cfg: ExperimentConfig, args) -> int:
    return _write_full_run(cfg, args, False, "baseline")


def _cmd_reduced(cfg: ExperimentConfig, args) -> int:
    from .experiments import run_reduced

    traj = run_reduced(cfg)
    out = _out_dir(cfg, args)
    path = out / "reduced.csv"
    g = traj.states @ cfg.game.pseudo_gradient_affine()[0].T + cfg.game.pseudo_gradient_affine()[1]
    v = 0.5 * np.sum(g * g, axis=1)
    write_trajectory_csv(path, traj, cfg.u_star, params_comment(cfg), v=v)
    settle = settling_time(traj, cfg.u_star, cfg.nu)
    print(f"wrote {path}")
    print(f"settling (nu={fmt(cfg.nu)}): {settle_str(settle)}")
    print(f"t_star: {fmt(cfg.t_star)}")
    return EXIT_OK


def _cmd_average(cfg: ExperimentConfig, args) -> int:
    from .experiments import run_average

    traj = run_average(cfg)
    out = _out_dir(cfg, args)
    path = out / "average.csv"
    write_trajectory_csv(path, traj, cfg.u_star, params_comment(cfg))
    print(f"wrote {path}")
    print(f"final dist: {fmt(float(np.linalg.norm(traj.states[-1, :cfg.game.n_players] - cfg.u_star)))}")
    return EXIT_OK


def _cmd_boundary(cfg: ExperimentConfig, args) -> int:
    from .dynamics import estimator_equilibrium
    from .experiments import run_boundary

    traj = run_boundary(cfg)
    out = _out_dir(cfg, args)
    path = out / "boundary_layer.csv"
    n = cfg.game.n_players
    x_star = estimator_equilibrium(cfg.game, cfg.u_frozen)
    dist = per_player_distances(traj.states, x_star)
    header = ["t"] + [f"x_{i + 1}_{j + 1}" for i in range(n) for j in range(n)]
    header.append("dist_to_eq")
    lines = [params_comment(cfg), ",".join(header)]
    for row_idx in range(len(traj)):
        row = [fmt(traj.times[row_idx])]
        row += [fmt(v) for v in traj.states[row_idx]]
        row.append(fmt(dist[row_idx]))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path}")
    print(f"final dist to estimator equilibrium: {fmt(dist[-1])}")
    return EXIT_OK


def _cmd_compare(cfg: ExperimentConfig, args) -> int:
    from .experiments import run_compare

    res = run_compare(cfg)
    out = _out_dir(cfg, args)
    comment = params_comment(cfg)
    path_fxt = out / "compare_fxt.csv"
    path_base = out / "compare_baseline.csv"
    write_trajectory_csv(path_fxt, res.fxt, res.u_star, comment)
    write_trajectory_csv(path_base, res.baseline, res.u_star, comment)
    print(f"wrote {path_fxt}")
    print(f"wrote {path_base}")
    print(compare_summary(res))
    return EXIT_OK


def _cmd_reachable(cfg: ExperimentConfig, args) -> int:
    from .experiments import run_reachable

    res = run_reachable(cfg)
    out = _out_dir(cfg, args)
    comment = params_comment(cfg)
    path_fxt = out / "reachable_fxt.csv"
    path_base = out / "reachable_baseline.csv"
    write_envelope_csv(path_fxt, res.fxt, comment)
    write_envelope_csv(path_base, res.baseline, comment)
    print(f"wrote {path_fxt}")
    print(f"wrote {path_base}")
    print(reachable_summary(res, cfg.nu, cfg.t_star))
    return EXIT_OK


_COMMANDS = {
    "check-game": _cmd_check_game,
    "probe-check": _cmd_probe_check,
    "simulate": _cmd_simulate,
    "baseline": _cmd_baseline,
    "reduced": _cmd_reduced,
    "average": _cmd_average,
    "boundary-layer": _cmd_boundary,
    "compare": _cmd_compare,
    "reachable": _cmd_reachable,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fxtnes",
        description=(
            "Model-free fixed-time Nash equilibrium seeking: "
            "simulations, analytical subsystems, and settling-time analysis."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="dotted-path config override, repeatable",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, overrides=args.override)
        return _COMMANDS[args.command](cfg, args)
    except IntegrationError as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except FxtnesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
