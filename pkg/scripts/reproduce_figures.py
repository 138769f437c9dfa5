"""Run the builtin figure scenarios and write their trajectory CSVs and metrics reports.

    python3 scripts/reproduce_figures.py --out figures --seed 0
"""

import argparse
import os
import sys

from qconsensus.config import BUILTIN_SCENARIOS
from qconsensus.scenario import OUTPUT_DIR_ENV, parse_report, run_scenario


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default="figures", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("names", nargs="*", default=sorted(BUILTIN_SCENARIOS))
    args = parser.parse_args(argv)

    os.environ[OUTPUT_DIR_ENV] = args.out
    status = 0
    for name in args.names:
        res = run_scenario(BUILTIN_SCENARIOS[name].with_seed(args.seed))
        rep = parse_report(res.report)
        sim = rep["simulation"]
        checks = ", ".join(f"{k}={'ok' if v['ok'] else 'FAIL'}" for k, v in res.checks.items())
        print(f"{name:6s} graph seed {rep['graph']['accepted_seed']:>5s}  stop {sim['stop_reason']:<10s} "
              f"spread {float(sim['final_spread']):8.4f}  {checks}")
        status |= res.exit_status
    return status


if __name__ == "__main__":
    sys.exit(main())
