"""Experiment configuration: one JSON document per run.

Schema (all sections except "game" optional; see README for details):

    {
      "game": "path/to/game.json" | {inline game document},
      "negate_costs": false,
      "graph": "complete" | {"edges": [[1,2], ...]},       # 1-based pairs
      "params": {"k": 1.0 | null, "t_star": null, "kappa": "derived" | number,
                 "regime": "monotone" | "potential",
                 "q1": 3.0, "q2": 1.5, "a": 0.1 | [..], "eps1": 5e-2,
                 "eps2": 1e-4, "kappa_tilde": [2, 3, 5], "rho2": 1.0,
                 "phases0": [..], "sing_tol": 1e-9},
      "integrator": {"step": null, "t_end": 6.0, "record_stride": null,
                     "substep_cap": null},
      "experiment": {"u_hat0": [..], "x0": null, "z0": [..], "u_frozen": [..],
                     "nu": 1e-3, "grid": {"min": -15, "max": 15, "count": 3},
                     "flow": "reduced", "backend": "auto", "seed": 0},
      "out_dir": "results"
    }

Exactly one of params.k / params.t_star must be given; a prescribed t_star
is converted to a gain through the matching inverse bound formula with the
configured kappa ("derived" = the monotonicity modulus computed from the
configured game).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .analysis import (
    FixedTimeRegime,
    fixed_time_monotone,
    fixed_time_potential,
    gain_for_time_monotone,
    gain_for_time_potential,
)
from .dynamics import FxtnesParams, alphas, first_primes
from .errors import ConfigError, FxtnesError
from .game import QuadraticGame, classify, game_from_dict, load_game
from .graph import CommGraph, complete_graph, require_connected


@dataclass
class ExperimentConfig:
    """Fully resolved run configuration."""

    game: QuadraticGame
    graph: CommGraph
    params: FxtnesParams
    kappa: float
    regime: FixedTimeRegime
    t_star: float
    step: float | None
    t_end: float
    record_stride: int | None
    substep_cap: float | None
    u_hat0: np.ndarray
    x0: np.ndarray
    z0: np.ndarray
    u_frozen: np.ndarray
    nu: float
    grid: list[dict]
    flow: str
    backend: str
    seed: int
    out_dir: Path
    raw: dict

    @property
    def u_star(self) -> np.ndarray:
        return self.game.nash_equilibrium()


def apply_overrides(doc: dict, overrides: Sequence[str]) -> dict:
    """Apply dotted-path key=value assignments to a config document.

    Values are parsed as JSON when possible, otherwise taken as strings:
    `--override params.k=2.0 --override graph=complete`.
    """
    doc = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, _, raw_value = item.partition("=")
        try:
            value = json.loads(raw_value)
        except json.JSONDecodeError:
            value = raw_value
        keys = path.strip().split(".")
        if not all(keys):
            raise ConfigError(f"override {item!r} has an empty path segment")
        node = doc
        for key in keys[:-1]:
            nxt = node.get(key)
            if not isinstance(nxt, dict):
                nxt = {}
                node[key] = nxt
            node = nxt
        node[keys[-1]] = value
    return doc


def _as_vector(value: Any, n: int, name: str) -> np.ndarray:
    if value is None:
        return np.zeros(n)
    if np.isscalar(value):
        return np.full(n, float(value))
    arr = np.asarray(value, dtype=float).ravel()
    if arr.shape[0] != n:
        raise ConfigError(f"{name} must have length {n}, got {arr.shape[0]}")
    return arr


def _parse_graph(section: Any, n: int) -> CommGraph:
    if section in (None, "complete"):
        return complete_graph(n)
    if isinstance(section, dict) and "edges" in section:
        edges = []
        for e in section["edges"]:
            if len(e) != 2:
                raise ConfigError(f"graph edge {e} is not a pair")
            i, j = int(e[0]), int(e[1])
            if not (1 <= i <= n and 1 <= j <= n):
                raise ConfigError(
                    f"graph edge ({i},{j}) out of 1-based range [1, {n}]"
                )
            edges.append((i - 1, j - 1))
        g = CommGraph(n=n, edges=tuple(edges))
        require_connected(g)
        return g
    raise ConfigError(f"cannot interpret graph section {section!r}")


def _parse_grid(section: Any, n: int) -> list[dict]:
    """Per-coordinate {min, max, count}; a single spec is broadcast."""
    if section is None:
        return []
    specs = section if isinstance(section, list) else [section] * n
    if len(specs) != n:
        raise ConfigError(f"grid needs {n} coordinate specs, got {len(specs)}")
    out = []
    for spec in specs:
        try:
            lo, hi, count = float(spec["min"]), float(spec["max"]), int(spec["count"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"grid spec {spec!r} needs min, max, count") from exc
        if count < 1 or hi < lo:
            raise ConfigError(f"grid spec {spec!r} is empty")
        out.append({"min": lo, "max": hi, "count": count})
    return out


def grid_points(specs: list[dict]) -> np.ndarray:
    """Cartesian product of per-coordinate linspaces."""
    axes = [
        np.linspace(s["min"], s["max"], s["count"]) if s["count"] > 1
        else np.array([0.5 * (s["min"] + s["max"])])
        for s in specs
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_config(doc: dict, base_dir: Path | None = None) -> ExperimentConfig:
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    if "game" not in doc:
        raise ConfigError("config must provide a game (path or inline)")
    game_section = doc["game"]
    if isinstance(game_section, str):
        path = Path(game_section)
        if not path.is_absolute():
            path = base_dir / path
        try:
            game = load_game(path)
        except OSError as exc:
            raise ConfigError(f"cannot read game file {path}: {exc}") from exc
    elif isinstance(game_section, dict):
        game = game_from_dict(game_section)
    else:
        raise ConfigError("game must be a path or an inline document")
    if doc.get("negate_costs", False):
        game = game.negated()
    n = game.n_players

    p = dict(doc.get("params", {}))
    q1 = float(p.get("q1", 3.0))
    q2 = float(p.get("q2", 1.5))
    a1, a2 = alphas(q1, q2)

    kappa_spec = p.get("kappa", "derived")
    if kappa_spec == "derived":
        kappa = classify(game).monotonicity_modulus
        if kappa <= 0:
            raise ConfigError(
                "derived kappa is not positive: the configured game is not "
                "strongly monotone (negate_costs may be required)"
            )
    else:
        kappa = float(kappa_spec)
        if kappa <= 0:
            raise ConfigError(f"kappa must be positive, got {kappa}")

    regime_name = str(p.get("regime", "monotone")).lower()
    try:
        regime = {
            "monotone": FixedTimeRegime.MONOTONE,
            "potential": FixedTimeRegime.POTENTIAL,
        }[regime_name]
    except KeyError:
        raise ConfigError(f"regime must be monotone or potential, got {regime_name!r}")

    k_given = p.get("k")
    t_star_given = p.get("t_star")
    if (k_given is None) == (t_star_given is None):
        raise ConfigError("exactly one of params.k and params.t_star is required")
    if k_given is not None:
        k = float(k_given)
        t_star = (
            fixed_time_monotone(k, kappa, a1, a2)
            if regime is FixedTimeRegime.MONOTONE
            else fixed_time_potential(k, kappa, a1, a2)
        )
    else:
        t_star = float(t_star_given)
        k = (
            gain_for_time_monotone(t_star, kappa, a1, a2)
            if regime is FixedTimeRegime.MONOTONE
            else gain_for_time_potential(t_star, kappa, a1, a2)
        )

    a_vec = p.get("a", 0.1)
    a_vec = np.full(n, float(a_vec)) if np.isscalar(a_vec) else np.asarray(a_vec, dtype=float)
    kappa_tilde = p.get("kappa_tilde", list(first_primes(n)))
    params = FxtnesParams(
        k=k,
        q1=q1,
        q2=q2,
        a=a_vec,
        eps1=float(p.get("eps1", 5e-2)),
        eps2=float(p.get("eps2", 1e-4)),
        kappa_tilde=tuple(kappa_tilde),
        rho2=_as_vector(p.get("rho2", 1.0), n, "rho2") if p.get("rho2") is not None else None,
        phases0=_as_vector(p.get("phases0"), n, "phases0"),
        sing_tol=float(p.get("sing_tol", 1e-9)),
    )

    graph = _parse_graph(doc.get("graph"), n)
    if graph.n != n:
        raise ConfigError(f"graph has {graph.n} vertices for {n} players")

    integ = dict(doc.get("integrator", {}))
    step = integ.get("step")
    step = float(step) if step is not None else None
    t_end = float(integ.get("t_end", 6.0))
    stride = integ.get("record_stride")
    stride = int(stride) if stride is not None else None
    cap = integ.get("substep_cap")
    cap = float(cap) if cap is not None else None

    exp = dict(doc.get("experiment", {}))
    u_hat0 = _as_vector(exp.get("u_hat0"), n, "u_hat0")
    x0_raw = exp.get("x0")
    x0 = np.zeros((n, n)) if x0_raw is None else np.asarray(x0_raw, dtype=float)
    if x0.shape != (n, n):
        raise ConfigError(f"x0 must be {n}x{n}, got {x0.shape}")
    z0 = _as_vector(exp.get("z0"), n, "z0") if exp.get("z0") is not None else u_hat0.copy()
    u_frozen = (
        _as_vector(exp.get("u_frozen"), n, "u_frozen")
        if exp.get("u_frozen") is not None
        else u_hat0.copy()
    )
    nu = float(exp.get("nu", 1e-3))
    grid = _parse_grid(exp.get("grid"), n)
    flow = str(exp.get("flow", "reduced"))
    if flow not in ("reduced", "full"):
        raise ConfigError(f"flow must be reduced or full, got {flow!r}")
    backend = str(exp.get("backend", "auto"))
    if backend not in ("auto", "fast", "generic"):
        raise ConfigError(f"backend must be auto, fast, or generic, got {backend!r}")
    seed = int(exp.get("seed", 0))

    out_dir = Path(doc.get("out_dir", "results"))

    return ExperimentConfig(
        game=game,
        graph=graph,
        params=params,
        kappa=kappa,
        regime=regime,
        t_star=t_star,
        step=step,
        t_end=t_end,
        record_stride=stride,
        substep_cap=cap,
        u_hat0=u_hat0,
        x0=x0,
        z0=z0,
        u_frozen=u_frozen,
        nu=nu,
        grid=grid,
        flow=flow,
        backend=backend,
        seed=seed,
        out_dir=out_dir,
        raw=doc,
    )


def load_config(path: str | Path, overrides: Sequence[str] = ()) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    doc = apply_overrides(doc, overrides)
    try:
        return build_config(doc, base_dir=path.parent)
    except FxtnesError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
