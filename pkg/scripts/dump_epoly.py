#!/usr/bin/env python3
"""Error Polynomial data E, L and Q = E / L on a fine grid, for plotting."""

import argparse
import csv
import sys

import numpy as np

from barycheb import binned, cheb_core, error_model, harness
from barycheb.errors import DomainError, UsageError


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=99)
    ap.add_argument("--f", default="cos1", choices=sorted(harness.FUNCTIONS))
    ap.add_argument("--omega", type=float, default=None, help="use cos(omega t) instead of --f")
    ap.add_argument("--bins", default="0")
    ap.add_argument("--samples", type=int, default=16, help="points per node interval")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    lay = binned.parse_layout(args.bins)
    g = error_model.usual_grid(args.n) if lay is None else error_model.binned_grid(args.n, lay)
    z = error_model.compute_z(g)
    f = harness.TestFunction("custom", args.omega) if args.omega else harness.get_function(args.f)
    y = f.ext(g.rounded)
    t = cheb_core.sample_points(g.rounded_double(), args.samples)
    t = np.sort(t[np.abs(t) < 1.0])
    Q, E, L = error_model.Q_factor(t, g, y, z)

    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "E", "L", "Q"])
    for row in zip(t, E.to_double(), L, Q.to_double()):
        w.writerow([repr(float(v)) for v in row])
    q = Q.to_double()
    print(f"# max|Q| = {np.nanmax(np.abs(q)):.3e}, max|E| = {E.max_abs():.3e}", file=sys.stderr)


if __name__ == "__main__":
    try:
        main()
    except (DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
