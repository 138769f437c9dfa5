"""Extremal extended equilibria of path graphs against the tube radius of the distance bound.

Columns: N, extremal spread, (N-2)^2/4, normalized distance of the extremal point, the bound
||A|| / (2 lambda_*), and both divided by N^2 (compare with 1/sqrt(120) and 2/pi^2).
"""

import argparse

from qconsensus.dynamics import consensus_stats
from qconsensus.equilibria import path_extremal_equilibrium, path_growth_constants, path_spread_bound
from qconsensus.graph import make_graph, spectral_summary


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 6, 9, 12, 20, 40, 80, 160])
    args = parser.parse_args(argv)

    print(f"{'N':>5} {'spread':>9} {'bound':>9} {'dist':>10} {'radius':>10} {'dist/N^2':>9} {'radius/N^2':>10}")
    for n in args.sizes:
        rec = path_extremal_equilibrium(n)
        dist = consensus_stats(rec.point).normalized_dist
        radius = spectral_summary(make_graph("path", n=n)).normalized_bound
        print(f"{n:5d} {rec.spread:9.2f} {path_spread_bound(n):9.2f} {dist:10.4f} {radius:10.4f} "
              f"{dist / n ** 2:9.5f} {radius / n ** 2:10.5f}")
    c = path_growth_constants()
    print(f"limits: dist/N^2 -> {c['extremal_coefficient']:.5f}, radius/N^2 -> {c['bound_coefficient']:.5f}")


if __name__ == "__main__":
    main()
