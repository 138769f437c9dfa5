"""
Scenario configuration files.

The format is ``key = value`` lines grouped under ``[section]`` headers::

    [graph]
    kind = complete
    n = 20

    [init]
    lo = 0
    hi = 30
    seed = 1

Only ``[graph]`` is required; every other key has a default (see ``DEFAULTS``).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from .graph import GRAPH_KINDS, Connectivity
from .integrator import SimConfig

CHECKS = (
    "integer_consensus",
    "extended_limit",
    "chattering",
    "order_preservation",
    "m_bound",
    "lyapunov_decay",
    "boundedness",
    "level_monotonicity",
    "finite_exit",
)

# section -> key -> (type, default). None means "no default / optional".
DEFAULTS = {
    "scenario": {"name": (str, "scenario")},
    "graph": {
        "kind": (str, None),
        "n": (int, None),
        "p": (int, None),
        "q": (int, None),
        "radius": (float, 0.2),
        "probability": (float, 0.1),
        "seed": (int, 0),
        "edges": (str, None),
        "min_connectivity": (str, "weakly_connected"),
        "max_retries": (int, 100_000),
    },
    "init": {"lo": (float, 0.0), "hi": (float, 30.0), "seed": (int, 0), "values": (str, None)},
    "sim": {
        "step": (float, 0.01),
        "horizon": (float, 60.0),
        "record_stride": (int, 1),
        "stop_tol": (float, 1e-10),
        "stop_window": (float, 1.0),
        "linear": (bool, False),
    },
    "output": {"dir": (str, "."), "trajectory": (str, None), "metrics": (str, None)},
    "checks": {
        "run": (str, ""),
        "tail_fraction": (float, 0.2),
        "tol": (float, 1e-6),
        "chattering_window": (float, 1.0),
    },
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GraphSpec:
    kind: Optional[str] = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    edges: Optional[str] = None
    min_connectivity: Connectivity = Connectivity.WEAKLY_CONNECTED
    max_retries: int = 100_000


@dataclass(frozen=True)
class InitSpec:
    lo: float = 0.0
    hi: float = 30.0
    seed: int = 0
    values: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class ScenarioConfig:
    graph: GraphSpec
    init: InitSpec = InitSpec()
    sim: SimConfig = SimConfig()
    name: str = "scenario"
    output_dir: str = "."
    trajectory_path: Optional[str] = None
    metrics_path: Optional[str] = None
    checks: Tuple[str, ...] = ()
    tail_fraction: float = 0.2
    tol: float = 1e-6
    chattering_window: float = 1.0

    def with_seed(self, seed: int) -> "ScenarioConfig":
        """Same scenario with both the initial-state seed and random-graph seed set to ``seed``."""
        return replace(self, init=replace(self.init, seed=seed),
                       graph=replace(self.graph, seed=seed))


def _convert(section, key, raw, kind, lineno_hint=""):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "1")
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected {kind.__name__}, got {raw!r}") from None


def parse_config(text: str) -> ScenarioConfig:
    """Parse scenario text; raises ConfigError on syntax errors, unknown keys or bad values."""
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"line {exc.lineno}: key outside of any [section]: {exc.line.strip()!r}") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"line {lineno}: cannot parse {line.strip()!r}") from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    values = {}
    for section in parser.sections():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown section [{section}]")
        spec = DEFAULTS[section]
        values[section] = {}
        for key, raw in parser[section].items():
            if key not in spec:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[section][key] = _convert(section, key, raw, spec[key][0])
    if "graph" not in values:
        raise ConfigError("missing required [graph] section")

    def get(section, key):
        return values.get(section, {}).get(key, DEFAULTS[section][key][1])

    graph = _graph_spec(values["graph"], get)
    init_values = get("init", "values")
    if init_values is not None:
        try:
            init_values = tuple(float(v) for v in init_values.replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"[init] values: cannot parse {init_values!r}") from None
    init = InitSpec(get("init", "lo"), get("init", "hi"), get("init", "seed"), init_values)
    if init_values is None and not init.lo < init.hi:
        raise ConfigError("[init] needs lo < hi")
    try:
        sim = SimConfig(**{k: get("sim", k) for k in DEFAULTS["sim"]})
    except ValueError as exc:
        raise ConfigError(f"[sim] {exc}") from None

    checks = tuple(c.strip() for c in get("checks", "run").split(",") if c.strip())
    for c in checks:
        if c not in CHECKS:
            raise ConfigError(f"unknown check {c!r}; expected one of {CHECKS}")
    return ScenarioConfig(
        graph=graph, init=init, sim=sim, name=get("scenario", "name"),
        output_dir=get("output", "dir"), trajectory_path=get("output", "trajectory"),
        metrics_path=get("output", "metrics"), checks=checks,
        tail_fraction=get("checks", "tail_fraction"), tol=get("checks", "tol"),
        chattering_window=get("checks", "chattering_window"),
    )


def _graph_spec(raw, get) -> GraphSpec:
    edges = get("graph", "edges")
    kind = get("graph", "kind")
    if edges is None and kind is None:
        raise ConfigError("[graph] needs either kind or edges")
    if kind is not None and kind not in GRAPH_KINDS:
        raise ConfigError(f"[graph] kind: unknown value {kind!r}; expected one of {GRAPH_KINDS}")
    conn = get("graph", "min_connectivity")
    try:
        min_conn = Connectivity[conn.upper()]
    except KeyError:
        raise ConfigError(f"[graph] min_connectivity: unknown value {conn!r}") from None
    params = {}
    if kind == "complete_bipartite":
        for key in ("p", "q"):
            if get("graph", key) is None:
                raise ConfigError(f"[graph] complete_bipartite needs {key}")
            params[key] = get("graph", key)
    elif kind is not None:
        if get("graph", "n") is None:
            raise ConfigError(f"[graph] {kind} needs n")
        params["n"] = get("graph", "n")
        if kind == "random_geometric":
            params["radius"] = get("graph", "radius")
        if kind == "random_directed":
            params["probability"] = get("graph", "probability")
    return GraphSpec(kind, params, get("graph", "seed"), edges, min_conn, get("graph", "max_retries"))


def _builtin(name, graph, checks, horizon, min_conn=Connectivity.WEAKLY_CONNECTED):
    kind, params = graph
    return ScenarioConfig(
        graph=GraphSpec(kind, params, 0, None, min_conn),
        init=InitSpec(0.0, 30.0, 0),
        sim=SimConfig(step=0.01, horizon=horizon),
        name=name,
        checks=checks,
    )


BUILTIN_SCENARIOS = {
    "fig2": _builtin("fig2", ("complete", {"n": 20}),
                     ("integer_consensus", "order_preservation", "m_bound", "lyapunov_decay",
                      "chattering", "finite_exit", "boundedness", "level_monotonicity"), 20.0),
    "fig2b": _builtin("fig2b", ("complete_bipartite", {"p": 10, "q": 10}),
                      ("integer_consensus", "m_bound", "lyapunov_decay", "chattering"), 30.0),
    "fig3": _builtin("fig3", ("path", {"n": 20}),
                     ("extended_limit", "m_bound", "lyapunov_decay", "chattering",
                      "boundedness", "level_monotonicity"), 60.0),
    "fig4": _builtin("fig4", ("random_geometric", {"n": 20, "radius": 0.2}),
                     ("extended_limit", "chattering", "m_bound", "boundedness"), 100.0),
    "fig5": _builtin("fig5", ("random_directed", {"n": 20, "probability": 0.1}),
                     ("chattering", "boundedness", "level_monotonicity"), 100.0,
                     Connectivity.CONNECTED),
}
