#!/usr/bin/env python3
"""b_n for usual rounding at several grid sizes, next to the published values."""

import argparse
import csv
import sys
import time
from dataclasses import dataclass

from barycheb import binned, error_model
from barycheb.errors import DomainError, UsageError

PUBLISHED = {64: 1.8e-16, 256: 2.7e-16, 1024: 3.7e-16, 4096: 6.0e-16}


@dataclass
class Config:
    sizes: tuple = (64, 256, 1024, 4096)
    bins: str = "0"


def run(cfg: Config, out=sys.stdout):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n_plus_1", "bn", "published", "ratio", "seconds"])
    lay = binned.parse_layout(cfg.bins)
    for m in cfg.sizes:
        start = time.process_time()
        g = error_model.usual_grid(m - 1) if lay is None else error_model.binned_grid(m - 1, lay)
        bn = error_model.bn_compute(g, error_model.compute_z(g))
        ref = PUBLISHED.get(m, float("nan"))
        w.writerow([m, repr(bn), ref, f"{bn / ref:.3f}", f"{time.process_time() - start:.1f}"])
        out.flush()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=list(Config.sizes), help="values of n+1")
    ap.add_argument("--bins", default="0")
    args = ap.parse_args()
    run(Config(tuple(args.sizes), args.bins))


if __name__ == "__main__":
    try:
        main()
    except (DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
