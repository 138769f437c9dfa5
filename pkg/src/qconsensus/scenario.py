"""Scenario execution, output files and text reports used by the command line."""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import equilibria as eq
from .config import ScenarioConfig
from .dynamics import consensus_stats
from .graph import (Connectivity, Graph, GraphError, connectivity_class, is_weight_balanced,
                    load_edge_list, make_graph, spectral_summary)
from .integrator import Trajectory, chattering_score, random_initial_state, simulate
from .quantize import SectorCapExceeded
from .metrics import (HypothesisViolation, cell_dwell_report, check_boundedness, check_level_monotonicity,
                      check_m_bound, check_order_preservation, is_integer_consensus, lyapunov_decay_check)

OUTPUT_DIR_ENV = "QCONSENSUS_OUTPUT_DIR"


def build_graph(spec) -> Tuple[Graph, Optional[int]]:
    """Graph for a GraphSpec plus the accepted seed (random kinds only).

    Random kinds are redrawn with seeds ``seed, seed + 1, ...`` until the
    graph reaches ``spec.min_connectivity``.
    """
    if spec.edges is not None:
        return load_edge_list(Path(spec.edges).read_text(encoding="utf-8")), None
    if spec.kind not in ("random_geometric", "random_directed"):
        return make_graph(spec.kind, **spec.params), None
    for seed in range(spec.seed, spec.seed + spec.max_retries):
        g = make_graph(spec.kind, seed=seed, **spec.params)
        if connectivity_class(g) >= spec.min_connectivity:
            return g, seed
    raise GraphError(f"no {spec.min_connectivity.label} {spec.kind} graph within "
                     f"{spec.max_retries} seeds from {spec.seed}")


def initial_state(cfg: ScenarioConfig, n: int) -> np.ndarray:
    if cfg.init.values is not None:
        if len(cfg.init.values) != n:
            raise ValueError(f"[init] values has {len(cfg.init.values)} entries, graph has {n} nodes")
        return np.array(cfg.init.values, dtype=float)
    return random_initial_state(n, cfg.init.lo, cfg.init.hi, cfg.init.seed)


def run_check(name: str, g: Graph, traj: Trajectory, cfg: ScenarioConfig, summary=None) -> Dict:
    """Evaluate one named check; the result dict always carries ``ok``."""
    try:
        if name == "integer_consensus":
            limit = traj.converged.state if traj.converged else None
            ok = limit is not None and is_integer_consensus(limit, cfg.tol)
            out = {"ok": ok, "converged": traj.converged is not None}
            if limit is not None:
                out["limit_value"] = float(np.round(limit.mean()))
                out["max_deviation"] = float(np.max(np.abs(limit - np.round(limit.mean()))))
            return out
        if name == "extended_limit":
            if traj.converged is None:
                return {"ok": False, "converged": False}
            try:
                rec = eq.classify_point(g, traj.converged.state, cfg.tol)
            except SectorCapExceeded as exc:
                return {"ok": False, "converged": True, "error": str(exc)}
            return {"ok": eq.EXTENDED in rec.classes, "converged": True,
                    "classes": ",".join(sorted(rec.classes)),
                    "witness": " ".join(map(str, rec.witness_cells[0])) if rec.witness_cells else "none",
                    "spread": rec.spread}
        if name == "chattering":
            tail = traj.tail(0.5)
            score = chattering_score(tail, cfg.chattering_window) if len(tail) >= 2 else 0.0
            return {"ok": score == 0.0, "score_trailing_half": score}
        if name == "order_preservation":
            r = check_order_preservation(traj, g)
            return {"ok": r.ok, "max_violation": r.max_violation, "slack": r.slack}
        if name == "m_bound":
            r = check_m_bound(g, traj, cfg.tail_fraction, cfg.tol, summary)
            return {"ok": r.satisfied, "normalized_tail_dist": r.normalized_tail_dist,
                    "bound": r.bound, "margin": r.margin}
        if name == "lyapunov_decay":
            r = lyapunov_decay_check(g, traj, cfg.tol, summary)
            return {"ok": r.ok, "worst_excess": r.worst_excess, "slack": r.slack}
        if name == "boundedness":
            r = check_boundedness(g, traj)
            return {"ok": r.ok, "max_violation": r.max_violation, "slack": r.slack}
        if name == "level_monotonicity":
            r = check_level_monotonicity(g, traj)
            return {"ok": r.ok, "max_violation": r.max_violation, "slack": r.slack,
                    "settle_time": r.settle_time, "final_levels": f"{r.final_levels[0]} {r.final_levels[1]}"}
        if name == "finite_exit":
            visits = cell_dwell_report(traj)
            open_ended = [v for v in visits if v.exit is None]
            final = open_ended[-1].cell
            ok = len(open_ended) == 1 and len(set(final)) == 1
            return {"ok": ok, "cells_visited": len(visits), "final_cell": " ".join(map(str, final))}
    except HypothesisViolation as exc:
        return {"ok": False, "error": str(exc)}
    raise ValueError(f"unknown check {name!r}")


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory_csv(traj: Trajectory, stream) -> None:
    n = traj.states.shape[1]
    header = ["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"q{i}" for i in range(1, n + 1)]
    stream.write(",".join(header) + "\n")
    for t, x, q in zip(traj.times, traj.states, traj.q_states):
        row = [format_float(t)] + [format_float(v) for v in x] + [str(int(v)) for v in q]
        stream.write(",".join(row) + "\n")


def read_trajectory_csv(text: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
    n = (data.shape[1] - 1) // 2
    return data[:, 0], data[:, 1:n + 1], data[:, n + 1:].astype(np.int64)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if value is None:
        return "none"
    return str(value)


def format_report(blocks: List[Tuple[str, Dict]]) -> str:
    """``[block]`` headers followed by ``key: value`` lines."""
    lines = []
    for title, items in blocks:
        lines.append(f"[{title}]")
        lines.extend(f"{k}: {_fmt(v)}" for k, v in items.items())
        lines.append("")
    return "\n".join(lines)


def parse_report(text: str) -> Dict[str, Dict[str, str]]:
    out: Dict[str, Dict[str, str]] = {}
    current = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = out.setdefault(line[1:-1], {})
        elif current is not None:
            key, _, value = line.partition(": ")
            current[key] = value
    return out


def spectral_block(g: Graph, summary) -> Dict:
    block = {
        "lambda_star": summary.lambda_star,
        "a_norm": summary.a_norm,
        "m_radius": summary.m_radius,
        "normalized_bound": summary.normalized_bound,
        "weight_balanced": is_weight_balanced(g, 1e-12),
        "connectivity": connectivity_class(g).label,
    }
    if g.kind == "path":
        n = g.n
        block["path_lambda_star_standard"] = 2 * (1 - math.cos(math.pi / n))
        block["path_lambda_star_as_printed"] = 1 - math.cos(math.pi / n)
    return block


@dataclass
class ScenarioResult:
    exit_status: int
    trajectory_path: Path
    metrics_path: Path
    report: str
    checks: Dict[str, Dict] = field(default_factory=dict)
    trajectory: Optional[Trajectory] = None


def output_paths(cfg: ScenarioConfig) -> Tuple[Path, Path]:
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    base = Path(env_dir) if env_dir else Path(cfg.output_dir)
    traj_name = cfg.trajectory_path or f"{cfg.name}_trajectory.csv"
    metrics_name = cfg.metrics_path or f"{cfg.name}_metrics.txt"
    if env_dir:
        traj_name, metrics_name = Path(traj_name).name, Path(metrics_name).name
    return base / traj_name, base / metrics_name


def run_scenario(cfg: ScenarioConfig, write: bool = True) -> ScenarioResult:
    """Build, simulate, check and (optionally) write the CSV and metrics report."""
    g, accepted_seed = build_graph(cfg.graph)
    x0 = initial_state(cfg, g.n)
    traj = simulate(g, x0, cfg.sim)
    summary = spectral_summary(g)

    checks = {name: run_check(name, g, traj, cfg, summary) for name in cfg.checks}
    all_ok = all(c["ok"] for c in checks.values())
    stats = consensus_stats(traj.final)

    blocks = [
        ("run", {"scenario": cfg.name, "init_seed": cfg.init.seed,
                 "init_range": f"{cfg.init.lo} {cfg.init.hi}" if cfg.init.values is None else "explicit"}),
        ("graph", {"kind": g.kind, "n": g.n, "requested_seed": cfg.graph.seed,
                   "accepted_seed": accepted_seed,
                   "edges": int(np.count_nonzero(g.weights))}),
        ("spectral", spectral_block(g, summary)),
        ("simulation", {**traj.meta, "samples": len(traj),
                        "converged": traj.converged is not None,
                        "converged_at": traj.converged.at_time if traj.converged else None,
                        "final_mean": stats.mean, "final_spread": stats.spread,
                        "final_normalized_dist": stats.normalized_dist}),
    ]
    blocks += [(f"check {name}", result) for name, result in checks.items()]
    blocks.append(("summary", {"checks": ",".join(cfg.checks) or "none", "all_ok": all_ok}))
    report = format_report(blocks)

    traj_path, metrics_path = output_paths(cfg)
    if write:
        traj_path.parent.mkdir(parents=True, exist_ok=True)
        metrics_path.parent.mkdir(parents=True, exist_ok=True)
        with open(traj_path, "w", encoding="utf-8", newline="") as fh:
            write_trajectory_csv(traj, fh)
        metrics_path.write_text(report, encoding="utf-8")
    return ScenarioResult(0 if all_ok else 1, traj_path, metrics_path, report, checks, traj)


def parse_box(text: str, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """``LO..HI`` (same range for every coordinate) or comma vectors ``a,b..c,d``."""
    lo_txt, sep, hi_txt = text.partition("..")
    if not sep:
        raise ValueError(f"box must look like LO..HI, got {text!r}")
    try:
        lo = np.array([int(v) for v in lo_txt.split(",")], dtype=np.int64)
        hi = np.array([int(v) for v in hi_txt.split(",")], dtype=np.int64)
    except ValueError:
        raise ValueError(f"box bounds must be integers, got {text!r}") from None
    return np.broadcast_to(lo, (n,)).copy(), np.broadcast_to(hi, (n,)).copy()


def _point_str(x) -> str:
    return " ".join(format(float(v), ".10g") for v in x)


def survey_equilibria(g: Graph, k_lo, k_hi, budget: int = eq.ENUMERATION_BUDGET) -> Tuple[str, List]:
    """Text listing of every extended equilibrium with a witness cell in the box."""
    records = eq.enumerate_extended_equilibria(g, k_lo, k_hi, budget)
    blocks = []
    for idx, rec in enumerate(records, start=1):
        blocks.append((f"equilibrium {idx}", {
            "point": _point_str(rec.point),
            "witnesses": "; ".join(" ".join(map(str, k)) for k in rec.witness_cells),
            "classes": ",".join(sorted(rec.classes)),
            "spread": rec.spread,
        }))
    counts = {cls: sum(cls in r.classes for r in records)
              for cls in (eq.CARATHEODORY, eq.EXTENDED, eq.KRASOWSKII)}
    summary = {"graph": g.kind, "n": g.n, "box_lo": " ".join(map(str, k_lo)),
               "box_hi": " ".join(map(str, k_hi)), "records": len(records), **counts}
    if records:
        summary["max_spread"] = max(r.spread for r in records)
    blocks.append(("summary", summary))
    if g.kind == "path" and g.n >= 3:
        ext = eq.path_extremal_equilibrium(g.n)
        blocks.append(("path extremal", {
            "spread_bound": eq.path_spread_bound(g.n),
            "cell": " ".join(map(str, eq.path_extremal_cell(g.n))),
            "point": _point_str(ext.point),
            "spread": ext.spread,
            "classes": ",".join(sorted(ext.classes)),
        }))
    return format_report(blocks), records


def bounds_report(cfg: ScenarioConfig) -> Tuple[str, bool]:
    """Spectral summary, tube radius, and the tail check on a simulated run when applicable."""
    g, accepted_seed = build_graph(cfg.graph)
    summary = spectral_summary(g)
    blocks = [("graph", {"kind": g.kind, "n": g.n, "accepted_seed": accepted_seed}),
              ("spectral", spectral_block(g, summary))]
    ok = True
    if g.kind == "path" and g.n >= 3:
        ext = eq.path_extremal_equilibrium(g.n)
        consts = eq.path_growth_constants()
        blocks.append(("path growth", {
            **consts,
            "bound_over_n_squared": (summary.normalized_bound or math.nan) / g.n ** 2,
            "extremal_normalized_dist": consensus_stats(ext.point).normalized_dist,
            "extremal_over_n_squared": consensus_stats(ext.point).normalized_dist / g.n ** 2,
        }))
    try:
        traj = simulate(g, initial_state(cfg, g.n), cfg.sim)
        r = check_m_bound(g, traj, cfg.tail_fraction, cfg.tol, summary)
        lyap = lyapunov_decay_check(g, traj, cfg.tol, summary)
        ok = r.satisfied and lyap.ok
        blocks.append(("m_bound", {"normalized_tail_dist": r.normalized_tail_dist, "bound": r.bound,
                                   "satisfied": r.satisfied, "margin": r.margin,
                                   "lyapunov_ok": lyap.ok, "lyapunov_worst_excess": lyap.worst_excess}))
    except HypothesisViolation as exc:
        blocks.append(("m_bound", {"applicable": False, "reason": str(exc)}))
    return format_report(blocks), ok
