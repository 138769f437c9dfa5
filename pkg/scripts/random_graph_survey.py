"""How often runs on random graphs end away from consensus, and whether any of them chatter.

For each seed a connected random graph is drawn (seeds are retried as in the scenario runner),
the dynamics are simulated from a uniform start on [0, 30], and the limit is classified.
"""

import argparse
from dataclasses import replace

import numpy as np

from qconsensus.config import BUILTIN_SCENARIOS
from qconsensus.equilibria import EXTENDED, classify_point
from qconsensus.integrator import chattering_score, random_initial_state, simulate
from qconsensus.quantize import SectorCapExceeded
from qconsensus.scenario import build_graph


def survey(name, seeds):
    cfg = BUILTIN_SCENARIOS[name]
    rows = []
    for seed in seeds:
        g, accepted = build_graph(replace(cfg.graph, seed=seed))
        traj = simulate(g, random_initial_state(g.n, 0, 30, seed), cfg.sim)
        score = chattering_score(traj.tail(0.5), 1.0)
        limit = traj.converged.state if traj.converged else None
        extended = None
        if limit is not None:
            try:
                extended = EXTENDED in classify_point(g, limit, 1e-6).classes
            except SectorCapExceeded:
                pass
        rows.append((seed, accepted, limit, score, extended))
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--seeds", type=int, default=20)
    args = parser.parse_args(argv)
    for name in ("fig4", "fig5"):
        rows = survey(name, range(args.seeds))
        converged = [r for r in rows if r[2] is not None]
        non_consensus = [r for r in converged if np.ptp(r[2]) > 1e-6]
        print(f"{name}: {len(converged)}/{len(rows)} converged, {len(non_consensus)} away from consensus, "
              f"max spread {max((np.ptp(r[2]) for r in converged), default=0):.3f}, "
              f"extended limits {sum(bool(r[4]) for r in converged)}, "
              f"max trailing chattering score {max(r[3] for r in rows):g}")


if __name__ == "__main__":
    main()
