#!/usr/bin/env python3
"""Replicated rejection rates (size under i.i.d. data, power under the four alternatives).

    python3 scripts/size_power.py --replications 1000 --alpha 0.05 --output out/size_power
"""

import argparse

from iidtest.experiments import (
    TABLE_A_VALUES,
    ExperimentConfig,
    format_rate_table,
    replicated_study,
    write_report,
)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--replications", "-R", type=int, default=1000)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--alpha", type=float, action="append", help="repeatable (default 0.05)")
    p.add_argument("--families", nargs="+", default=["iid", "ar1", "ma1", "sv", "garch"])
    p.add_argument("--laws", nargs="+", default=["gaussian", "laplace"])
    p.add_argument("--tests", nargs="+", default=["ljung-box", "ljung-box-abs", "new", "whitened-t"])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", help="prefix for PREFIX.csv and PREFIX.json")
    args = p.parse_args()

    cfg = ExperimentConfig(
        families=args.families,
        a_values=TABLE_A_VALUES,
        laws=args.laws,
        N=args.N,
        K=args.K,
        tests=args.tests,
        replications=args.replications,
        alphas=args.alpha or [0.05],
        seed=args.seed,
    )
    report = replicated_study(cfg, workers=args.workers)
    print(format_rate_table(report), end="")
    if args.output:
        write_report(report, f"{args.output}.csv", "csv")
        write_report(report, f"{args.output}.json", "json")


if __name__ == "__main__":
    main()
