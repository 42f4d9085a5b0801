"""Experiment driver: test sets, Step II / Step III error measurement, timing.

Errors are measured against pair-precision references:

* stepII  = |formula in pairs (rounded inputs) - f in pairs|
* stepIII = |formula in binary64 - formula in pairs (same rounded inputs)|
* overall = |formula in binary64 - f in pairs|

Rounded inputs are the binary64 nodes (or binned offsets), y_k = f at the
node rounded once, and the weights rounded once.
"""

from __future__ import annotations

import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .binned import BinLayout, BinnedDiffs, BinnedGrid, eval_binned, gen_binned_nodes, parse_layout
from .cheb_core import (FloatDiffs, Grid, WeightVector, chebyshev_lambda_ext, first_formula_eval,
                        first_formula_ext, gen_nodes_usual, salzer_weights, second_formula_eval,
                        second_formula_ext, NORMALIZED_LAMBDA)
from .errors import DomainError, StepOneCritical, UsageError
from .extprec import DDArray, dd_sin_cos

INTERVALS = 100
SUCC, PRED, INTERIOR = 200, 200, 600
STEP1_TOL = 1e-15  # Chebyshev tail of f above this makes Step I dominate
FORMULAS = ("first", "second")
THREADS_ENV = "BARYCHEB_THREADS"


# ---------------------------------------------------------------------------
# functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    name: str
    omega: float

    def ext(self, t) -> DDArray:
        """cos(omega t) in pairs."""
        t = t if isinstance(t, DDArray) else DDArray(np.atleast_1d(np.asarray(t, dtype=np.float64)))
        return dd_sin_cos(t * self.omega)[1]

    def step1_tail(self, n: int) -> float:
        """4 sum_{k > n} |J_k(omega)|, which bounds the interpolation error of
        cos(omega t) at n + 1 Chebyshev points."""
        if n + 1 <= self.omega:
            return math.inf
        from scipy.special import jv
        k = np.arange(n + 1, n + 1 + 2000 + int(self.omega))
        return float(4.0 * np.sum(np.abs(jv(k, self.omega))))


FUNCTIONS = {
    "cos1": TestFunction("cos1", 1.0),
    "cos100": TestFunction("cos100", 100.0),
    "cos1e4": TestFunction("cos1e4", 1.0e4),
    "cos1e5": TestFunction("cos1e5", 1.0e5),
}


def get_function(name: str) -> TestFunction:
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise UsageError(f"unknown function {name!r}; choose from {sorted(FUNCTIONS)}") from None


def step1_critical(f: TestFunction, n: int) -> bool:
    return f.step1_tail(n) > STEP1_TOL


# ---------------------------------------------------------------------------
# test sets
# ---------------------------------------------------------------------------

SET_ANCHORS = {"Tm1": -1, "T0": 0}


@dataclass
class TestSet:
    anchor: int
    n: int
    points: np.ndarray
    intervals: np.ndarray  # left node index of each interval
    per_interval: tuple  # (successors, predecessors, interior)
    scale: int = 1

    @property
    def interval_count(self) -> int:
        return self.intervals.size

    @property
    def name(self) -> str:
        return "Tm1" if self.anchor == -1 else "T0"


def _steps(x: np.ndarray, count: int, direction: float) -> np.ndarray:
    out = np.empty((count, x.size))
    cur = x
    for i in range(count):
        cur = np.nextafter(cur, direction)
        out[i] = cur
    return out


def build_test_set(anchor: int, n: int, scale: int = 1, nodes: Optional[np.ndarray] = None) -> TestSet:
    """100 node intervals near ``anchor``; per interval the successors of the
    left node, the predecessors of the right node and equally spaced interior
    points, 200/600/200 of them divided by ``scale``."""
    if anchor not in (-1, 0):
        raise DomainError("anchor must be -1 or 0")
    if scale < 1 or SUCC % scale or INTERIOR % scale:
        raise DomainError("scale divisor must divide 200")
    if anchor == -1 and n < 200:
        raise DomainError("anchor -1 needs n >= 200")
    if anchor == 0 and n < 400:
        raise DomainError("anchor 0 needs n >= 400")
    x = gen_nodes_usual(n).nodes if nodes is None else np.asarray(nodes, dtype=np.float64)
    first = 0 if anchor == -1 else n // 2 - INTERVALS
    ks = np.arange(first, first + INTERVALS)
    left, right = x[ks], x[ks + 1]
    ns, npred, nint = SUCC // scale, PRED // scale, INTERIOR // scale
    succ = _steps(left, ns, np.inf)
    pred = _steps(right, npred, -np.inf)
    frac = np.arange(1, nint + 1) / (nint + 1)
    inner = left[None, :] + (right - left)[None, :] * frac[:, None]
    # interval-major order: successors, interior, predecessors (ascending t)
    pts = np.concatenate([succ, inner, pred[::-1]], axis=0).T.ravel()
    return TestSet(anchor, n, pts, ks, (ns, npred, nint), scale)


def test_set_by_name(name: str, n: int, scale: int = 1) -> TestSet:
    if name not in SET_ANCHORS:
        raise UsageError(f"unknown test set {name!r}; choose Tm1 or T0")
    return build_test_set(SET_ANCHORS[name], n, scale)


# ---------------------------------------------------------------------------
# configurations
# ---------------------------------------------------------------------------


@dataclass
class Setup:
    """Rounded inputs for one (formula, node mode, n, f) combination."""

    formula: str
    n: int
    f: TestFunction
    layout: Optional[BinLayout]
    grid: Grid
    binned: Optional[BinnedGrid]
    y: np.ndarray
    w: WeightVector

    @property
    def bins(self) -> str:
        return "0" if self.layout is None else self.layout.name


def make_setup(formula: str, n: int, f: Union[str, TestFunction], bins: Union[str, BinLayout, None] = None) -> Setup:
    if formula not in FORMULAS:
        raise UsageError(f"unknown formula {formula!r}")
    f = get_function(f) if isinstance(f, str) else f
    layout = parse_layout(bins) if isinstance(bins, str) else bins
    grid = gen_nodes_usual(n)
    binned = gen_binned_nodes(n, layout) if layout is not None else None
    node_vals = binned.node_pairs() if binned is not None else DDArray(grid.nodes)
    y = f.ext(node_vals).to_double()
    if formula == "first":
        lam = chebyshev_lambda_ext(n).to_double()
        w = WeightVector(lam, NORMALIZED_LAMBDA, "exact nodes, rounded once")
    else:
        w = salzer_weights(n)
    return Setup(formula, n, f, layout, grid, binned, y, w)


def eval_working(setup: Setup, t: np.ndarray) -> np.ndarray:
    if setup.binned is not None:
        return eval_binned(setup.formula, t, setup.binned, setup.y, setup.w)
    if setup.formula == "first":
        return first_formula_eval(t, setup.grid, setup.y, setup.w)
    return second_formula_eval(t, setup.grid, setup.y, setup.w)


def eval_pairs(setup: Setup, t: np.ndarray) -> DDArray:
    src = BinnedDiffs(t, setup.binned) if setup.binned is not None else FloatDiffs(t, setup.grid.nodes)
    y, w = DDArray(setup.y), DDArray(setup.w.values)
    if setup.formula == "first":
        return first_formula_ext(src, y, w)
    return second_formula_ext(src, y, w)


# ---------------------------------------------------------------------------
# error measurement
# ---------------------------------------------------------------------------


@dataclass
class ErrorReport:
    t: np.ndarray
    stepII: np.ndarray
    stepIII: np.ndarray
    overall: np.ndarray
    meta: dict = field(default_factory=dict)

    def aggregates(self) -> dict:
        out = {}
        for key in ("stepII", "stepIII", "overall"):
            v = getattr(self, key)
            out[key] = {"max": float(np.max(v)), "mean": float(np.mean(v))}
        return out

    @property
    def ratio(self) -> float:
        """mean Step II error / mean Step III error."""
        den = float(np.mean(self.stepIII))
        return math.inf if den == 0.0 else float(np.mean(self.stepII)) / den

    @property
    def cross_slack(self) -> float:
        """max(overall - stepII - stepIII); rounding of the error arithmetic only."""
        return float(np.max(self.overall - self.stepII - self.stepIII))

    def rows(self):
        return zip(self.t.tolist(), self.stepII.tolist(), self.stepIII.tolist(), self.overall.tolist())


def _chunks(size: int, parts: int) -> list:
    bounds = np.linspace(0, size, parts + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _measure_chunk(setup: Setup, t: np.ndarray):
    ref = setup.f.ext(t)
    ext = eval_pairs(setup, t)
    wp = eval_working(setup, t)
    step2 = np.abs((ext - ref).to_double())
    step3 = np.abs((DDArray(wp) - ext).to_double())
    overall = np.abs((DDArray(wp) - ref).to_double())
    return step2, step3, overall


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def measure_errors(formula: str, n: int, f: Union[str, TestFunction], test_set: Union[str, TestSet] = "Tm1",
                   bins: Union[str, BinLayout, None] = None, scale: int = 10, threads: Optional[int] = None,
                   allow_step1: bool = False) -> ErrorReport:
    """Per-point Step II, Step III and overall errors for one configuration."""
    f = get_function(f) if isinstance(f, str) else f
    if not allow_step1 and step1_critical(f, n):
        raise StepOneCritical(f"Step I is critical for {f.name} with n + 1 = {n + 1}")
    ts = test_set_by_name(test_set, n, scale) if isinstance(test_set, str) else test_set
    if ts.n != n:
        raise DomainError("test set was built for a different degree")
    setup = make_setup(formula, n, f, bins)
    threads = default_threads() if threads is None else max(1, threads)
    parts = _chunks(ts.points.size, threads)
    if threads == 1:
        results = [_measure_chunk(setup, ts.points[sl]) for sl in parts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda sl: _measure_chunk(setup, ts.points[sl]), parts))
    step2 = np.concatenate([r[0] for r in results])
    step3 = np.concatenate([r[1] for r in results])
    overall = np.concatenate([r[2] for r in results])
    meta = {"formula": formula, "bins": setup.bins, "n": n, "f": f.name, "set": ts.name, "scale": ts.scale}
    return ErrorReport(ts.points, step2, step3, overall, meta)


# ---------------------------------------------------------------------------
# timing
# ---------------------------------------------------------------------------


@dataclass
class TimingRecord:
    case: str
    samples_ns: list
    points: int

    @property
    def median_ns(self) -> float:
        return float(statistics.median(self.samples_ns))

    @property
    def median_ns_per_point(self) -> float:
        return self.median_ns / self.points


def bench_timing(formula: str, n: int, test_set: Union[str, TestSet] = "Tm1",
                 bins: Union[str, BinLayout, None] = None, repeats: int = 5, scale: int = 10,
                 f: str = "cos1") -> TimingRecord:
    """CPU time of the binary64 evaluator over a test set; one warmup pass."""
    if repeats < 5:
        raise DomainError("need at least 5 repeats")
    ts = test_set_by_name(test_set, n, scale) if isinstance(test_set, str) else test_set
    setup = make_setup(formula, n, f, bins)
    eval_working(setup, ts.points)  # warmup
    samples = []
    for _ in range(repeats):
        start = time.process_time_ns()
        eval_working(setup, ts.points)
        samples.append(time.process_time_ns() - start)
    return TimingRecord(f"{formula}/{setup.bins}", samples, ts.points.size)


def bench_suite(n: int, test_set: str = "Tm1", repeats: int = 5, scale: int = 10,
                cases=(("first", "0"), ("first", "3"), ("second", "0"))) -> list:
    """Timing records normalized to the usual first formula measured in the same run.

    Returns (record, normalized) pairs; the baseline is always measured first."""
    ts = test_set_by_name(test_set, n, scale)
    base = bench_timing("first", n, ts, "0", repeats)
    out = [(base, 1.0)]
    for formula, bins in cases:
        if (formula, bins) == ("first", "0"):
            continue
        rec = bench_timing(formula, n, ts, bins, repeats)
        out.append((rec, rec.median_ns_per_point / base.median_ns_per_point))
    return out
