#!/usr/bin/env python3
"""Single-run p-value tables for AR(1), MA(1), SV and GARCH(1,1) at N=100, K=5.

Each table has one row per a in {0.1, ..., 0.5} and six columns: Ljung-Box on
x (O), on |x| (A) and the whitened (x, |x|) test (N), for Gaussian (G) and
standardized Laplace (L) innovations.  A single realization per cell is noisy;
use ``size_power.py`` for rejection rates.

    python3 scripts/paper_tables.py --seed 1 --output out/paper_tables
"""

import argparse

from iidtest.experiments import ExperimentConfig, format_paper_tables, single_run_table, write_report


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", help="prefix for PREFIX.csv and PREFIX.json")
    args = p.parse_args()

    report = single_run_table(ExperimentConfig.paper_tables(seed=args.seed), workers=args.workers)
    print(format_paper_tables(report), end="")
    if args.output:
        write_report(report, f"{args.output}.csv", "csv")
        write_report(report, f"{args.output}.json", "json")


if __name__ == "__main__":
    main()
