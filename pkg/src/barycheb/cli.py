"""Command line driver; every subcommand writes CSV to stdout or --out.

Exit codes: 0 success, 1 failed verification, 2 domain or usage error,
3 refused Step-I-critical request.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import sys
from typing import Optional, Sequence

import numpy as np

from . import binned, cheb_core, error_model, harness
from .errors import ConstructionError, DomainError, RangeError, StepOneCritical, UsageError
from .extprec import DDArray, rounding_mode_ok

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_STEP1 = 0, 1, 2, 3


def _num(x) -> str:
    # repr of a float is the shortest string that round-trips
    return repr(float(x))


class _Writer:
    def __init__(self, stream):
        self._csv = csv.writer(stream, lineterminator="\n")

    def header(self, *names):
        self._csv.writerow(names)

    def row(self, *values):
        self._csv.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in values])


def _layout(args) -> Optional[binned.BinLayout]:
    return binned.parse_layout(args.bins)


def cmd_nodes(args, out: _Writer) -> int:
    layout = _layout(args)
    if layout is None:
        g = cheb_core.gen_nodes_usual(args.n)
        out.header("k", "x")
        for k, x in enumerate(g.nodes):
            out.row(k, float(x))
    else:
        g = binned.gen_binned_nodes(args.n, layout)
        out.header("k", "bin", "base", "u")
        for k in range(g.size):
            out.row(k, int(g.bin_of[k]), float(layout.bases[g.bin_of[k]]), float(g.u[k]))
    return EXIT_OK


def cmd_weights(args, out: _Writer) -> int:
    if args.formula == "first":
        w = cheb_core.exact_chebyshev_weights(args.n)
    else:
        w = cheb_core.salzer_weights(args.n)
    out.header("k", "w")
    for k, v in enumerate(w.values):
        out.row(k, float(v))
    return EXIT_OK


def _parse_points(text: Optional[str]) -> np.ndarray:
    if not text:
        raise UsageError("eval needs --t (comma separated points)")
    try:
        return np.array([float(s) for s in text.split(",") if s.strip()], dtype=np.float64)
    except ValueError as exc:
        raise UsageError(f"bad point list: {exc}") from None


def cmd_eval(args, out: _Writer) -> int:
    t = _parse_points(args.t)
    if np.any(np.abs(t) > 1.0):
        raise DomainError("points must lie in [-1, 1]")
    setup = harness.make_setup(args.formula, args.n, args.f, args.bins)
    vals = harness.eval_working(setup, t)
    out.header("t", "p")
    for a, b in zip(t, np.atleast_1d(vals)):
        out.row(float(a), float(b))
    return EXIT_OK


def cmd_errors(args, out: _Writer) -> int:
    rep = harness.measure_errors(args.formula, args.n, args.f, args.set, args.bins, args.scale,
                                 args.threads, args.allow_step1)
    out.header("t", "stepII", "stepIII", "overall")
    for row in rep.rows():
        out.row(*row)
    return EXIT_OK


def cmd_ratio(args, out: _Writer) -> int:
    rep = harness.measure_errors(args.formula, args.n, args.f, args.set, args.bins, args.scale,
                                 args.threads, args.allow_step1)
    agg = rep.aggregates()
    out.header("formula", "bins", "set", "f", "n_plus_1", "mean_stepII", "mean_stepIII", "ratio")
    out.row(args.formula, rep.meta["bins"], args.set, args.f, args.n + 1,
            agg["stepII"]["mean"], agg["stepIII"]["mean"], float(rep.ratio))
    return EXIT_OK


def _rounded_grid(args) -> error_model.RoundedGrid:
    layout = _layout(args)
    if layout is None:
        return error_model.usual_grid(args.n)
    return error_model.binned_grid(args.n, layout)


def cmd_bn(args, out: _Writer) -> int:
    grid = _rounded_grid(args)
    bn = error_model.bn_compute(grid, error_model.compute_z(grid))
    out.header("n_plus_1", "bn")
    out.row(args.n + 1, float(bn))
    return EXIT_OK


def cmd_zstats(args, out: _Writer) -> int:
    grid = _rounded_grid(args)
    st = error_model.z_stats(error_model.compute_z(grid), args.n)
    print(f"# norm_inf={st.norm_inf!r} norm_1={st.norm_1!r} ratio={st.ratio!r}", file=sys.stderr)
    out.header("k", "z_k")
    for k, z in st.rows():
        out.row(k, z)
    return EXIT_OK


def cmd_epoly(args, out: _Writer) -> int:
    grid = _rounded_grid(args)
    zvec = error_model.compute_z(grid)
    f = harness.get_function(args.f)
    y = DDArray(f.ext(grid.rounded).to_double())
    t = cheb_core.sample_points(grid.rounded_double(), args.samples)
    t = np.sort(t[np.abs(t) < 1.0])
    Q, E, L = error_model.Q_factor(t, grid, y, zvec)
    out.header("t", "E", "L", "Q")
    for a, e, l, q in zip(t, E.to_double(), L, Q.to_double()):
        out.row(float(a), float(e), float(l), float(q))
    return EXIT_OK


def cmd_bounds(args, out: _Writer) -> int:
    grid = _rounded_grid(args)
    rep = error_model.bound_suite(grid)
    out.header("name", "lhs", "rhs", "satisfied")
    for name, lhs, rhs, ok in rep.rows():
        out.row(name, float(lhs), float(rhs), "true" if ok else "false")
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_bench(args, out: _Writer) -> int:
    cases = (("first", "0"), ("first", args.bins if args.bins != "0" else "3"), ("second", "0"))
    recs = harness.bench_suite(args.n, args.set, args.repeats, args.scale, cases)
    out.header("case", "median_ns_per_point", "normalized")
    for rec, norm in recs:
        out.row(rec.case, rec.median_ns_per_point, float(norm))
    return EXIT_OK


def cmd_verify_layout(args, out: _Writer) -> int:
    layout = _layout(args)
    if layout is None:
        raise UsageError("verify-layout needs --bins 3 or --bins dyadic:<levels>")
    grid = binned.gen_binned_nodes(args.n, layout) if args.n else None
    rep = binned.verify_layout(layout, grid)
    out.header("check", "passed", "detail")
    for c in rep.checks:
        out.row(c.name, "true" if c.passed else "false", c.detail)
    return EXIT_OK if rep.passed else EXIT_FAILED


COMMANDS = {
    "nodes": (cmd_nodes, "node coordinates or binned offsets"),
    "weights": (cmd_weights, "barycentric weights for --formula"),
    "eval": (cmd_eval, "evaluate the interpolant of --f at --t"),
    "errors": (cmd_errors, "per-point Step II / Step III / overall errors"),
    "ratio": (cmd_ratio, "mean Step II over mean Step III"),
    "bn": (cmd_bn, "linear-programming coefficient b_n"),
    "zstats": (cmd_zstats, "relative weight errors z_k"),
    "epoly": (cmd_epoly, "Error Polynomial E = L Q at sample points"),
    "bounds": (cmd_bounds, "numerically evaluated error bounds"),
    "bench": (cmd_bench, "median CPU time per point"),
    "verify-layout": (cmd_verify_layout, "check a bin layout"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="degree (number of nodes minus one)")
    common.add_argument("--formula", choices=harness.FORMULAS, default="first")
    common.add_argument("--bins", default="0", help="0, 3 or dyadic:<levels>")
    common.add_argument("--f", default="cos1", choices=sorted(harness.FUNCTIONS))
    common.add_argument("--set", default="Tm1", choices=sorted(harness.SET_ANCHORS))
    common.add_argument("--scale", type=int, default=10, help="keep 1/scale of each point class")
    common.add_argument("--out", default=None, help="write CSV here instead of stdout")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--allow-step1", action="store_true", help="run Step-I-critical cells anyway")
    common.add_argument("--t", default=None, help="eval: comma separated points")
    common.add_argument("--repeats", type=int, default=5, help="bench: timed repetitions")
    common.add_argument("--samples", type=int, default=8, help="epoly: samples per node interval")

    parser = _Parser(prog="barycheb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_)
    return parser


_DEFAULT_N = {"bn": 63, "zstats": 1023, "epoly": 99, "bounds": 64, "bench": 99999, "verify-layout": 0}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_USAGE if exc.code else EXIT_OK
    if not rounding_mode_ok():
        print("error: binary64 arithmetic is not round-to-nearest-even", file=sys.stderr)
        return EXIT_USAGE
    if args.n is None:
        args.n = _DEFAULT_N.get(args.command, 999)
    func = COMMANDS[args.command][0]
    buf = io.StringIO()
    try:
        code = func(args, _Writer(buf))
    except StepOneCritical as exc:
        print(f"refused: {exc} (use --allow-step1)", file=sys.stderr)
        return EXIT_STEP1
    except (DomainError, UsageError, RangeError, ConstructionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        with contextlib.suppress(BrokenPipeError):
            sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run_cli())
