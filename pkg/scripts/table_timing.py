#!/usr/bin/env python3
"""CPU time per point of the binary64 evaluators, normalized to the usual
first formula measured in the same run."""

import argparse
import csv
import sys

from barycheb import harness
from barycheb.errors import DomainError, UsageError


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 10000, 100000], help="values of n+1")
    ap.add_argument("--set", default="Tm1")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--scale", type=int, default=100)
    ap.add_argument("--bins", default="3")
    args = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n_plus_1", "case", "median_ns_per_point", "normalized"])
    cases = (("first", "0"), ("first", args.bins), ("second", "0"))
    for m in args.sizes:
        for rec, norm in harness.bench_suite(m - 1, args.set, args.repeats, args.scale, cases):
            w.writerow([m, rec.case, f"{rec.median_ns_per_point:.1f}", f"{norm:.3f}"])
        sys.stdout.flush()


if __name__ == "__main__":
    try:
        main()
    except (DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
