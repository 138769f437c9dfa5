"""Command-line entry point: ``qconsensus {simulate,scenario,survey,bounds}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional


from .config import BUILTIN_SCENARIOS, CHECKS, DEFAULTS, ConfigError, parse_config
from .graph import GraphError
from .scenario import (OUTPUT_DIR_ENV, bounds_report, build_graph, parse_box, run_scenario,
                       survey_equilibria)


def _defaults_help() -> str:
    lines = ["configuration keys and defaults:"]
    for section, keys in DEFAULTS.items():
        lines.append(f"  [{section}]")
        for key, (kind, default) in keys.items():
            shown = "(unset)" if default is None else repr(default)
            lines.append(f"    {key} = {shown}  ({kind.__name__})")
    lines.append(f"  checks available: {', '.join(CHECKS)}")
    lines.append(f"  builtin scenarios: {', '.join(BUILTIN_SCENARIOS)}")
    lines.append(f"  output directory override: ${OUTPUT_DIR_ENV}")
    lines.append("exit status: 0 all checks pass, 1 some check failed, 2 usage or input error")
    return "\n".join(lines)


def _load(path: str):
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _finish_run(result) -> int:
    print(result.report, end="")
    print(f"trajectory: {result.trajectory_path}")
    print(f"metrics: {result.metrics_path}")
    return result.exit_status


def cmd_simulate(args) -> int:
    return _finish_run(run_scenario(_load(args.config)))


def cmd_scenario(args) -> int:
    cfg = BUILTIN_SCENARIOS.get(args.name)
    if cfg is None:
        raise ConfigError(f"unknown scenario {args.name!r}; choose from {', '.join(BUILTIN_SCENARIOS)}")
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return _finish_run(run_scenario(cfg))


def cmd_survey(args) -> int:
    cfg = _load(args.config)
    g, _ = build_graph(cfg.graph)
    k_lo, k_hi = parse_box(args.box, g.n)
    text, _ = survey_equilibria(g, k_lo, k_hi, args.budget)
    print(text, end="")
    return 0


def cmd_bounds(args) -> int:
    text, ok = bounds_report(_load(args.config))
    print(text, end="")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qconsensus",
        description="Quantized consensus dynamics: simulation, equilibrium surveys and bound reports.",
        epilog=_defaults_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario described by a config file")
    p.add_argument("--config", required=True, metavar="PATH")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scenario", help="run a builtin scenario")
    p.add_argument("name", choices=sorted(BUILTIN_SCENARIOS))
    p.add_argument("--seed", type=int, default=None, help="seed for the initial state and random graph")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("survey", help="enumerate extended equilibria in a box of cells")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--box", required=True, metavar="LO..HI",
                   help="cell box, e.g. 0..3 or per-coordinate 0,0,0..1,2,3")
    p.add_argument("--budget", type=int, default=10_000_000, help="maximum number of cells")
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("bounds", help="spectral summary and distance-to-consensus bound")
    p.add_argument("--config", required=True, metavar="PATH")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GraphError, ValueError, OSError) as exc:
        print(f"qconsensus: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
