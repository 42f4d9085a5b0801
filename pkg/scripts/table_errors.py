#!/usr/bin/env python3
"""Maximum Step II error, maximum overall error and the mean Step II / Step III
ratio for the usual and binned first formula and the usual second formula."""

import argparse
import csv
import sys
from dataclasses import dataclass

from barycheb import harness
from barycheb.errors import DomainError, StepOneCritical, UsageError

CONFIGS = (("first", "0"), ("first", "3"), ("second", "0"))


@dataclass
class Config:
    sizes: tuple = (1000, 10000)
    functions: tuple = ("cos1", "cos100", "cos1e4")
    sets: tuple = ("Tm1", "T0")
    scale: int = 10
    threads: int = 1


def run(cfg: Config, out=sys.stdout):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["formula", "bins", "set", "f", "n_plus_1", "max_stepII", "max_overall",
                "mean_stepII", "mean_stepIII", "ratio"])
    for m in cfg.sizes:
        for f in cfg.functions:
            for ts in cfg.sets:
                for formula, bins in CONFIGS:
                    try:
                        rep = harness.measure_errors(formula, m - 1, f, ts, bins, cfg.scale, cfg.threads)
                    except StepOneCritical:
                        w.writerow([formula, bins, ts, f, m, "step1", "step1", "", "", ""])
                        continue
                    a = rep.aggregates()
                    w.writerow([formula, bins, ts, f, m, repr(a["stepII"]["max"]), repr(a["overall"]["max"]),
                                repr(a["stepII"]["mean"]), repr(a["stepIII"]["mean"]), f"{rep.ratio:.4g}"])
                    out.flush()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=list(Config.sizes), help="values of n+1")
    ap.add_argument("--functions", nargs="+", default=list(Config.functions))
    ap.add_argument("--sets", nargs="+", default=list(Config.sets))
    ap.add_argument("--scale", type=int, default=10, help="1 for the full 1e5-point sets")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    run(Config(tuple(args.sizes), tuple(args.functions), tuple(args.sets), args.scale, args.threads))


if __name__ == "__main__":
    try:
        main()
    except (DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
