#!/usr/bin/env python3
"""Statistics of the relative weight errors z_k: norms, the log^2 ratio and
optionally the per-k values with windowed standard deviations."""

import argparse
import csv
import sys
from dataclasses import dataclass
from typing import Optional

from barycheb import binned, error_model
from barycheb.errors import DomainError, UsageError

PUBLISHED = {1024: (4.4e-12, 8.7e-11), 4096: (9.1e-11, 1.8e-9)}


@dataclass
class Config:
    sizes: tuple = (256, 1024, 4096)
    bins: str = "0"
    dump: Optional[str] = None  # file prefix for per-k CSVs


def run(cfg: Config, out=sys.stdout):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n_plus_1", "norm_inf", "norm_1", "ratio", "published_inf", "published_1", "model_scale"])
    lay = binned.parse_layout(cfg.bins)
    for m in cfg.sizes:
        g = error_model.usual_grid(m - 1) if lay is None else error_model.binned_grid(m - 1, lay)
        st = error_model.z_stats(error_model.compute_z(g), m - 1)
        ref = PUBLISHED.get(m, (float("nan"), float("nan")))
        w.writerow([m, repr(st.norm_inf), repr(st.norm_1), f"{st.ratio:.3f}", ref[0], ref[1],
                    f"{st.model_scale:.4g}"])
        out.flush()
        if cfg.dump:
            with open(f"{cfg.dump}_{m}_z.csv", "w", encoding="utf-8") as fh:
                d = csv.writer(fh, lineterminator="\n")
                d.writerow(["k", "z_k"])
                d.writerows((k, repr(v)) for k, v in st.rows())
            with open(f"{cfg.dump}_{m}_std.csv", "w", encoding="utf-8") as fh:
                d = csv.writer(fh, lineterminator="\n")
                d.writerow(["window_center", "std", "model"])
                for c, s in zip(st.window_center, st.window_std):
                    model = st.model_scale * float(st.model_at(c)) if c >= 2 else float("nan")
                    d.writerow([c, repr(float(s)), repr(model)])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=list(Config.sizes))
    ap.add_argument("--bins", default="0")
    ap.add_argument("--dump", default=None, help="prefix for per-k CSV files")
    args = ap.parse_args()
    run(Config(tuple(args.sizes), args.bins, args.dump))


if __name__ == "__main__":
    try:
        main()
    except (DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
