import os
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from qconsensus.cli import build_parser, main
from qconsensus.config import BUILTIN_SCENARIOS, ConfigError, parse_config
from qconsensus.graph import Connectivity, connectivity_class, make_graph
from qconsensus.integrator import SimConfig
from qconsensus.scenario import (OUTPUT_DIR_ENV, build_graph, parse_box, parse_report, read_trajectory_csv,
                                 run_scenario, survey_equilibria)

ROOT = Path(__file__).resolve().parents[1]


def test_parse_minimal():
    cfg = parse_config("[graph]\nkind = complete\nn = 20")
    assert cfg.graph.kind == "complete" and cfg.graph.params == {"n": 20}
    assert cfg.sim == SimConfig() and cfg.init.lo == 0 and cfg.init.hi == 30
    assert cfg.checks == ()


def test_parse_full():
    text = """
    # comment
    [scenario]
    name = demo
    [graph]
    kind = random_geometric
    n = 12
    radius = 0.35  # inline comment
    seed = 4
    min_connectivity = strongly_connected
    [init]
    values = 0.5, 1.5 2.5
    [sim]
    step = 0.02
    horizon = 5
    linear = yes
    [checks]
    run = boundedness, m_bound
    tol = 1e-8
    """
    cfg = parse_config("\n".join(line.strip() for line in text.splitlines()))
    assert cfg.name == "demo"
    assert cfg.graph.params == {"n": 12, "radius": 0.35}
    assert cfg.graph.min_connectivity is Connectivity.STRONGLY_CONNECTED
    assert cfg.init.values == (0.5, 1.5, 2.5)
    assert cfg.sim.step == 0.02 and cfg.sim.linear is True
    assert cfg.checks == ("boundedness", "m_bound") and cfg.tol == 1e-8


@pytest.mark.parametrize("text,msg", [
    ("[graph]\nkind = heptagon\nn = 3", "unknown value"),
    ("", "missing required"),
    ("kind = path", "line 1"),
    ("[graph]\nkind = path\nn = 4\ncolour = red", "unknown key"),
    ("[graph]\nkind = path\nn = four", "expected int"),
    ("[graph]\nkind = path\nn = 4\n[sim]\nlinear = maybe", "expected bool"),
    ("[graph]\nkind = path\nn = 4\n[extra]\na = 1", "unknown section"),
    ("[graph]\nkind = path", "needs n"),
    ("[graph]\nkind = complete_bipartite\np = 2", "needs q"),
    ("[graph]\nn = 3", "kind or edges"),
    ("[graph]\nkind = path\nn = 4\n[init]\nlo = 5\nhi = 1", "lo < hi"),
    ("[graph]\nkind = path\nn = 4\n[checks]\nrun = bogus", "unknown check"),
    ("[graph]\nkind = path\nn = 4\n[sim]\nstep = 0", "[sim]"),
    ("[graph]\nkind = path\nn = 4\nn = 5", "n"),
    ("[graph]\nkind = path\nn = 4\nmin_connectivity = loose", "min_connectivity"),
    ("[graph]\nkind = path\nn = 4\n[init]\nvalues = 1, x", "values"),
    ("[graph]\nkind = path\n  garbage line\n", "line"),
])
def test_parse_errors(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)


def test_builtins_pin_caption_parameters():
    for name, cfg in BUILTIN_SCENARIOS.items():
        assert cfg.sim.step == 0.01 and (cfg.init.lo, cfg.init.hi) == (0, 30)
        assert cfg.name == name
    assert BUILTIN_SCENARIOS["fig4"].graph.params == {"n": 20, "radius": 0.2}
    assert BUILTIN_SCENARIOS["fig5"].graph.params == {"n": 20, "probability": 0.1}
    seeded = BUILTIN_SCENARIOS["fig2"].with_seed(9)
    assert seeded.init.seed == 9 and seeded.graph.seed == 9


def test_build_graph_retries_until_connected():
    g, seed = build_graph(BUILTIN_SCENARIOS["fig4"].graph)
    assert connectivity_class(g) >= Connectivity.WEAKLY_CONNECTED
    assert np.array_equal(g.weights, make_graph("random_geometric", seed=seed, n=20, radius=0.2).weights)
    for s in range(seed):
        assert connectivity_class(make_graph("random_geometric", seed=s, n=20, radius=0.2)) < Connectivity.WEAKLY_CONNECTED
    from qconsensus.graph import GraphError
    with pytest.raises(GraphError):
        build_graph(replace(BUILTIN_SCENARIOS["fig4"].graph, max_retries=5))


def test_build_graph_from_edge_file(tmp_path):
    edges = tmp_path / "g.txt"
    edges.write_text("1 2 1\n2 1 1\n2 3 1\n3 2 1\n")
    cfg = parse_config(f"[graph]\nedges = {edges}\n")
    g, seed = build_graph(cfg.graph)
    assert g.n == 3 and seed is None


def _small_cfg(tmp_path, checks="integer_consensus, m_bound, boundedness"):
    return parse_config(f"""[scenario]
name = small
[graph]
kind = complete
n = 6
[init]
seed = 3
[sim]
horizon = 20
[output]
dir = {tmp_path}
[checks]
run = {checks}
""")


def test_run_scenario_writes_files(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    res = run_scenario(_small_cfg(tmp_path))
    assert res.exit_status == 0
    assert res.trajectory_path == tmp_path / "small_trajectory.csv"
    text = res.trajectory_path.read_text()
    header = text.splitlines()[0]
    assert header == "t," + ",".join(f"x{i}" for i in range(1, 7)) + "," + ",".join(f"q{i}" for i in range(1, 7))
    t, x, q = read_trajectory_csv(text)
    assert np.array_equal(x, res.trajectory.states) and np.array_equal(q, res.trajectory.q_states)
    assert np.array_equal(t, res.trajectory.times)
    report = parse_report(res.metrics_path.read_text())
    assert report["summary"]["all_ok"] == "true"
    assert report["simulation"]["stop_reason"] in ("stagnation", "zero_field")
    assert float(report["spectral"]["lambda_star"]) == pytest.approx(6, abs=1e-9)
    assert report["check m_bound"]["ok"] == "true"
    assert report["run"]["init_seed"] == "3"


def test_trajectory_csv_byte_identical(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    a = run_scenario(replace(_small_cfg(tmp_path), trajectory_path="a.csv", metrics_path="a.txt"))
    b = run_scenario(replace(_small_cfg(tmp_path), trajectory_path="b.csv", metrics_path="b.txt"))
    assert a.trajectory_path.read_bytes() == b.trajectory_path.read_bytes()


def test_env_var_overrides_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    res = run_scenario(replace(_small_cfg(tmp_path / "ignored"), trajectory_path="deep/t.csv"))
    assert res.trajectory_path == tmp_path / "env" / "t.csv" and res.trajectory_path.exists()


def test_failing_check_gives_nonzero_exit(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    cfg = parse_config(f"""[scenario]
name = pathfail
[graph]
kind = path
n = 10
[sim]
horizon = 60
[output]
dir = {tmp_path}
[checks]
run = integer_consensus, order_preservation, boundedness
""")
    res = run_scenario(cfg)
    assert res.exit_status == 1
    assert res.metrics_path.exists()
    assert res.checks["boundedness"]["ok"]
    assert not res.checks["integer_consensus"]["ok"]
    assert "complete graph" in res.checks["order_preservation"]["error"]


def test_scenario_fig2_and_fig3(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    fig2 = run_scenario(BUILTIN_SCENARIOS["fig2"])
    assert fig2.exit_status == 0
    assert float(fig2.checks["integer_consensus"]["limit_value"]).is_integer()
    fig3 = run_scenario(BUILTIN_SCENARIOS["fig3"])
    assert fig3.exit_status == 0 and "extended" in fig3.checks["extended_limit"]["classes"]
    assert fig3.checks["extended_limit"]["spread"] > 1


@pytest.mark.parametrize("name", ["fig4", "fig5"])
def test_scenario_random_graphs_no_chattering(tmp_path, monkeypatch, name):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    res = run_scenario(BUILTIN_SCENARIOS[name])
    assert res.exit_status == 0
    assert res.checks["chattering"]["score_trailing_half"] == 0
    report = parse_report(res.metrics_path.read_text())
    assert report["graph"]["accepted_seed"] != "none"


def test_survey_examples():
    text, recs = survey_equilibria(make_graph("path", n=4), [0] * 4, [1] * 4)
    assert len(recs) == 4
    report = parse_report(text)
    assert report["summary"]["records"] == "4" and report["summary"]["caratheodory"] == "2"
    assert report["path extremal"]["spread"] == "1"
    _, recs = survey_equilibria(make_graph("complete", n=4), [0] * 4, [2] * 4)
    assert len(recs) == 3 and all(np.ptp(r.point) == 0 for r in recs)
    text, _ = survey_equilibria(make_graph("path", n=9), [0] * 9, [0] * 9)
    assert parse_report(text)["path extremal"]["spread"] == "12"


def test_survey_budget():
    with pytest.raises(ValueError):
        survey_equilibria(make_graph("path", n=8), [0] * 8, [9] * 8, budget=1000)


def test_parse_box():
    lo, hi = parse_box("0..3", 4)
    assert lo.tolist() == [0] * 4 and hi.tolist() == [3] * 4
    lo, hi = parse_box("0,1..2,3", 2)
    assert lo.tolist() == [0, 1] and hi.tolist() == [2, 3]
    for bad in ("0-3", "a..b"):
        with pytest.raises(ValueError):
            parse_box(bad, 2)


def test_cli_scenario_and_seed(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert main(["scenario", "fig2", "--seed", "4"]) == 0
    out = capsys.readouterr().out
    assert "init_seed: 4" in out and (tmp_path / "fig2_trajectory.csv").exists()


def test_cli_simulate_survey_bounds(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    cfg = ROOT / "configs" / "path4.ini"
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert main(["survey", "--config", str(cfg), "--box", "0..1"]) == 0
    assert "records: 4" in capsys.readouterr().out
    assert main(["bounds", "--config", str(ROOT / "configs" / "path9.ini")]) == 0
    out = capsys.readouterr().out
    assert "path_lambda_star_standard" in out and "extremal_coefficient" in out


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[graph]\nkind = heptagon\nn = 3\n")
    assert main(["simulate", "--config", str(bad)]) == 2
    assert "unknown value" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.ini")]) == 2
    with pytest.raises(SystemExit):
        main(["scenario", "nope"])


def test_cli_unwritable_output(tmp_path, monkeypatch, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(blocker / "sub"))
    assert main(["scenario", "fig2"]) == 2


def test_help_documents_defaults():
    text = build_parser().format_help()
    assert "stop_window = 1.0" in text and "max_retries" in text and OUTPUT_DIR_ENV in text
