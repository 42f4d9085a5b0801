#!/usr/bin/env python3
"""Evaluate both sides of every bound for usual and binned grids."""

import argparse
import csv
import sys
import time

from barycheb import binned, error_model
from barycheb.errors import DomainError, UsageError


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 512], help="degrees n")
    ap.add_argument("--bins", nargs="+", default=["0", "3"])
    ap.add_argument("--heavy", action="store_true", help="run dense checks beyond n = 512")
    args = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "layout", "theta", "name", "lhs", "rhs", "satisfied", "note"])
    failed = 0
    for n in args.sizes:
        for spec in args.bins:
            lay = binned.parse_layout(spec)
            start = time.process_time()
            g = error_model.usual_grid(n) if lay is None else error_model.binned_grid(n, lay)
            rep = error_model.bound_suite(g, heavy=True if args.heavy else None)
            for r in rep.records:
                w.writerow([n, rep.layout, repr(rep.theta), r.name, repr(r.lhs), repr(r.rhs),
                            r.satisfied, r.note])
            failed += len(rep.failures())
            print(f"# n={n} {rep.layout}: {len(rep.records)} records, {len(rep.failures())} failed, "
                  f"{time.process_time() - start:.1f} s", file=sys.stderr)
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    try:
        main()
    except (DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
