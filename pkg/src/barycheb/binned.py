"""Binned node representation x_k = b_l + u_k.

Each bin of [-1, 1] carries one exactly representable base point.  Offsets
u_k are computed straight from trigonometric formulas (never as x_k - b), so
nodes near +-1 keep small absolute errors.  Evaluation points are mapped to
(bin, t - b) with an exact subtraction, and every difference t - x_k becomes
(b_l - b_m) + (u_t - u_k).

Bin boundary convention (mirrors the three-bin picture): bins left of the
central one are [a, b), the central bin is closed, bins right of it are
(a, b].  A boundary point therefore belongs to the bin nearer to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .cheb_core import (
    NORMALIZED_LAMBDA,
    WeightVector,
    _first_from_diffs,
    _node_blocks,
    _second_from_diffs,
    bary_sums_ext,
    gen_nodes_usual,
    _fill_hits,
    _first_exponent,
    tiny_exponents,
)
from .errors import ConstructionError, DomainError, UsageError
from .extprec import PI, DDArray, dd_add_d, dd_div, dd_mul, dd_sincos, two_sum

FORMAT_VERSION = 1


@dataclass(frozen=True)
class BinLayout:
    edges: np.ndarray  # len(bases) + 1 increasing boundaries, edges[0] = -1, edges[-1] = 1
    bases: np.ndarray
    name: str = "custom"

    @property
    def n_bins(self) -> int:
        return self.bases.size


@dataclass(frozen=True)
class BinnedGrid:
    n: int
    layout: BinLayout
    bin_of: np.ndarray
    u: np.ndarray
    u_ext: Optional[DDArray] = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return self.n + 1

    def node_pairs(self) -> DDArray:
        """Represented nodes b + u as exact pairs."""
        return DDArray(*two_sum(self.layout.bases[self.bin_of], self.u))

    def rounded_nodes(self) -> np.ndarray:
        """Nearest binary64 number to each represented node."""
        return self.layout.bases[self.bin_of] + self.u

    def slices(self) -> list[tuple[int, slice]]:
        """(bin, node slice) runs; nodes are sorted so each bin is contiguous."""
        cuts = np.flatnonzero(np.diff(self.bin_of)) + 1
        starts = np.concatenate([[0], cuts]).tolist()
        stops = np.concatenate([cuts, [self.size]]).tolist()
        return [(int(self.bin_of[a]), slice(a, b)) for a, b in zip(starts, stops)]


# ---------------------------------------------------------------------------
# layouts
# ---------------------------------------------------------------------------


def _mirror(neg_edges: list[float], neg_bases: list[float], centre: float, name: str) -> BinLayout:
    """neg_edges are the left ends of the bins below the central bin
    [-centre, centre]; reflection supplies the rest."""
    edges = neg_edges + [-centre, centre] + [-e for e in reversed(neg_edges)]
    bases = neg_bases + [0.0] + [-b for b in reversed(neg_bases)]
    layout = BinLayout(np.array(edges), np.array(bases), name)
    failures = [c for c in _layout_checks(layout) if not c.passed]
    if failures:
        raise ConstructionError("; ".join(f"{c.name}: {c.detail}" for c in failures))
    return layout


def layout_three() -> BinLayout:
    return _mirror([-1.0], [-1.0], 0.5, "three")


def layout_dyadic(levels: int) -> BinLayout:
    """4*levels - 1 bins: [-1, 2**-L - 1), [2**-k - 1, 2**(1-k) - 1) for
    k = L..2, [-2**-k, -2**-k-1) for k = 1..L-1, central [-2**-L, 2**-L],
    then the reflection; every base sits at the end farther from 0."""
    if not 2 <= levels <= 40:
        raise DomainError("levels must lie in [2, 40]")
    edges = [-1.0]
    bases = [-1.0]
    for k in range(levels, 1, -1):
        edges.append(2.0**-k - 1.0)
        bases.append(2.0**-k - 1.0)
    for k in range(1, levels):
        edges.append(-(2.0**-k))
        bases.append(-(2.0**-k))
    return _mirror(edges, bases, 2.0**-levels, f"dyadic:{levels}")


def parse_layout(spec: str) -> Optional[BinLayout]:
    """'0' (no bins), '3', or 'dyadic:<levels>'."""
    if spec in ("0", "", "none", "usual"):
        return None
    if spec == "3":
        return layout_three()
    if spec.startswith("dyadic:"):
        try:
            levels = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"bad layout {spec!r}") from exc
        return layout_dyadic(levels)
    raise UsageError(f"unknown layout {spec!r}")


# ---------------------------------------------------------------------------
# locating points
# ---------------------------------------------------------------------------


def _locate_hi(layout: BinLayout, t: np.ndarray) -> np.ndarray:
    e = layout.edges
    right = np.searchsorted(e, t, side="right") - 1  # edge belongs to the right bin
    left = np.searchsorted(e, t, side="left") - 1  # edge belongs to the left bin
    idx = np.where(t <= 0.0, right, left)
    return np.clip(idx, 0, layout.n_bins - 1)


def _locate_pair(layout: BinLayout, hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """Bin of the exact value hi + lo."""
    idx = _locate_hi(layout, hi)
    e = layout.edges
    on_left = (hi == e[idx]) & (lo < 0.0) & (idx > 0)
    on_right = (hi == e[idx + 1]) & (lo > 0.0) & (idx < layout.n_bins - 1)
    return idx - on_left + on_right


def locate_bin(t, layout: BinLayout):
    """Return (bin index, t - base) with the subtraction exact."""
    arr = np.asarray(t, dtype=np.float64)
    pts = np.atleast_1d(arr)
    if np.any(np.abs(pts) > 1.0) or np.any(np.isnan(pts)):
        raise DomainError("t outside [-1, 1]")
    l = _locate_hi(layout, pts)
    u = pts - layout.bases[l]
    if arr.ndim == 0:
        return int(l[0]), float(u[0])
    return l, u


# ---------------------------------------------------------------------------
# nodes
# ---------------------------------------------------------------------------


OFFSET_MODES = ("pair", "working")


def _angles(num: np.ndarray, den: int):
    """num / den * pi as pairs.

    Forming q * math.pi in binary64 inherits the rounding of math.pi, a
    common relative bias of about -0.35 ulp in every offset; a common bias c
    shifts all weights by about n c, which the first formula passes straight
    into its result."""
    num = np.asarray(num, dtype=np.float64)
    zero = np.zeros_like(num)
    qh, ql = dd_div(num, zero, np.full_like(num, float(den)), zero)
    return dd_mul(qh, ql, PI[0], PI[1])


def _offset_from_anchor(k: np.ndarray, n: int, anchor: np.ndarray, mode: str = "pair"):
    """x_k - anchor for anchor in {-1, 0, 1}, each from its own formula:
    2 sin^2(k pi / 2n), sin((2k - n) pi / 2n) and -2 sin^2((n - k) pi / 2n).

    Returns (hi, lo).  Mode "pair" evaluates the formula in pairs and keeps
    the pair; "working" evaluates sin in binary64 at the once-rounded angle
    and returns lo = 0."""
    num = np.where(anchor < 0, k, np.where(anchor > 0, n - k, 2 * k - n))
    ah, al = _angles(num, 2 * n)
    sq = np.where(anchor < 0, 2.0, np.where(anchor > 0, -2.0, 0.0))
    if mode == "pair":
        (sh, sl), _ = dd_sincos(ah, al)
        qh, ql = dd_mul(sh, sl, sh, sl)
        centre = anchor == 0
        return np.where(centre, sh, sq * qh), np.where(centre, sl, sq * ql)
    if mode != "working":
        raise UsageError(f"unknown offset mode {mode!r}")
    s = np.fromiter((math.sin(a) for a in ah.tolist()), dtype=np.float64, count=ah.size)
    return np.where(anchor == 0, s, sq * s * s), np.zeros_like(s)


def gen_binned_nodes(n: int, layout: BinLayout, mode: str = "pair") -> BinnedGrid:
    """Offsets u_k = x_k - b_l rounded once from a pair value of x_k - anchor,
    so the relative error of u_k is about one rounding even when x_k is close
    to a base other than -1, 0 or 1."""
    if n < 1:
        raise DomainError("degree must be >= 1")
    k = np.arange(n + 1)
    xhat = gen_nodes_usual(n).nodes
    anchor = np.where(xhat < -0.5, -1.0, np.where(xhat > 0.5, 1.0, 0.0))
    dh, dl = _offset_from_anchor(k, n, anchor, mode)
    vh, vl = dd_add_d(dh, dl, anchor)
    bins = _locate_pair(layout, vh, vl)
    shift = anchor - layout.bases[bins]  # exact: both are dyadic with close exponents
    uh, ul = dd_add_d(dh, dl, shift)
    grid = BinnedGrid(n, layout, bins.astype(np.int64), uh + ul)
    inside = _contained(grid)
    if not inside.all():
        raise ConstructionError(f"nodes {np.flatnonzero(~inside)[:5].tolist()} fall outside their bins")
    return grid


def _contained(grid: BinnedGrid) -> np.ndarray:
    x = grid.node_pairs()
    return _locate_pair(grid.layout, x.hi, x.lo) == grid.bin_of


def binned_diff(l: int, u_t: float, grid: BinnedGrid, k: int) -> float:
    b = grid.layout.bases
    m = grid.bin_of[k]
    return float((b[l] - b[m]) + (u_t - grid.u[k]))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _binned_diffs(grid: BinnedGrid, l: np.ndarray, ut: np.ndarray) -> np.ndarray:
    """(nodes, points) array of t - x_k, one base difference hoisted per bin run."""
    b = grid.layout.bases
    bt = b[l]
    same = bool(np.all(bt == bt[0])) if bt.size else True
    out = np.empty((grid.size, ut.size))
    for m, sl in grid.slices():
        block = out[sl]
        np.subtract(ut[None, :], grid.u[sl, None], out=block)
        if same:
            db = float(bt[0] - b[m])
            if db != 0.0:
                block += db
        else:
            block += (bt - b[m])[None, :]
    return out


def eval_binned(formula: str, t, grid: BinnedGrid, y, w: WeightVector):
    if formula not in ("first", "second"):
        raise UsageError(f"unknown formula {formula!r}")
    if formula == "first" and w.kind != NORMALIZED_LAMBDA:
        raise UsageError("first formula needs normalized-lambda weights")
    arr = np.asarray(t, dtype=np.float64)
    pts = np.atleast_1d(arr)
    l, ut = locate_bin(pts, grid.layout)
    y = np.asarray(y, dtype=np.float64)
    out = np.empty(ut.size)
    wy = w.values * y
    with np.errstate(divide="ignore", invalid="ignore"):
        for sl in _node_blocks(ut, grid.size):
            diff = _binned_diffs(grid, l[sl], ut[sl])
            e = tiny_exponents(pts[sl])
            if formula == "first":
                out[sl] = _first_from_diffs(diff, wy, y, e)
            else:
                out[sl] = _second_from_diffs(diff, w.values, y, e)
    return float(out[0]) if arr.ndim == 0 else out


class BinnedDiffs:
    """Pair-precision t - x_k for binned nodes: (b_l - b_m) + (u_t - u_k) with
    the inner subtraction kept exact and the base difference added in pairs."""

    def __init__(self, t, grid: BinnedGrid):
        self.grid = grid
        self.t_hi = np.atleast_1d(np.asarray(t, dtype=np.float64))
        self.l, self.ut = locate_bin(self.t_hi, grid.layout)
        self.bt = grid.layout.bases[self.l]
        self.n_points = self.ut.size
        self.n_nodes = grid.size

    def diff(self, k: int) -> DDArray:
        g = self.grid
        sh, sl = two_sum(self.ut, -g.u[k])
        db = self.bt - g.layout.bases[g.bin_of[k]]  # exact by layout construction
        return DDArray(*dd_add_d(sh, sl, db))


def binned_formula_ext(formula: str, t, grid: BinnedGrid, y: DDArray, w: DDArray) -> DDArray:
    src = BinnedDiffs(t, grid)
    if formula == "second":
        sums = bary_sums_ext(src, w, [y])
        with np.errstate(divide="ignore", invalid="ignore"):
            out = sums.nums[0] / sums.den
    else:
        sums = bary_sums_ext(src, w, [y], with_product=True)
        out = (sums.prod * sums.nums[0]).ldexp(_first_exponent(sums, src.n_nodes))
    return _fill_hits(out, sums.hit, y)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class LayoutReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _layout_checks(layout: BinLayout) -> list[Check]:
    b = layout.bases
    e = layout.edges
    checks = []

    bad = []
    fr = [Fraction(float(v)) for v in b]
    for i in range(b.size):
        for j in range(b.size):
            if Fraction(float(b[i] - b[j])) != fr[i] - fr[j]:
                bad.append((i, j))
    checks.append(Check("base_difference_exact", not bad, f"{len(bad)} inexact pairs"))

    sterb = []
    for i in range(b.size):
        lo_e, hi_e, base = e[i], e[i + 1], b[i]
        if base == 0.0:
            continue
        if lo_e < 0.0 < hi_e or (base < 0) != (hi_e <= 0.0):
            sterb.append(i)
            continue
        mags = sorted((abs(lo_e), abs(hi_e)))
        if not (abs(base) / 2 <= mags[0] and mags[1] <= 2 * abs(base)):
            sterb.append(i)
    checks.append(Check("sterbenz_coverage", not sterb, f"bins {sterb}"))

    ordered = bool(np.all(np.diff(e) > 0)) and e[0] == -1.0 and e[-1] == 1.0
    inside = bool(np.all((b >= e[:-1]) & (b <= e[1:])))
    checks.append(Check("edges_partition", ordered and inside, ""))
    return checks


def verify_layout(layout: BinLayout, grid: Optional[BinnedGrid] = None) -> LayoutReport:
    checks = _layout_checks(layout)
    if grid is not None:
        inside = _contained(grid)
        checks.append(Check("node_containment", bool(inside.all()),
                            f"{int((~inside).sum())} nodes outside"))
    return LayoutReport(checks)


def adhoc_layout(edges, bases, name: str = "custom") -> BinLayout:
    """Build a layout without construction-time checks (for testing verify_layout)."""
    return BinLayout(np.asarray(edges, dtype=np.float64), np.asarray(bases, dtype=np.float64), name)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def dumps(grid: BinnedGrid) -> str:
    lay = grid.layout
    lines = [f"barycheb-binned-grid {FORMAT_VERSION}", f"n {grid.n}",
             f"layout {lay.name}", f"bins {lay.n_bins}"]
    for i in range(lay.n_bins):
        lines.append(f"bin {i} {float(lay.edges[i]).hex()} {float(lay.edges[i + 1]).hex()} "
                     f"{float(lay.bases[i]).hex()}")
    for k in range(grid.size):
        lines.append(f"node {k} {int(grid.bin_of[k])} {float(grid.u[k]).hex()}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> BinnedGrid:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0][0] != "barycheb-binned-grid":
        raise UsageError("not a binned grid file")
    if int(lines[0][1]) != FORMAT_VERSION:
        raise UsageError(f"unsupported format version {lines[0][1]}")
    n = int(lines[1][1])
    name = lines[2][1]
    nb = int(lines[3][1])
    edges = np.empty(nb + 1)
    bases = np.empty(nb)
    for parts in lines[4:4 + nb]:
        i = int(parts[1])
        edges[i] = float.fromhex(parts[2])
        edges[i + 1] = float.fromhex(parts[3])
        bases[i] = float.fromhex(parts[4])
    bin_of = np.empty(n + 1, dtype=np.int64)
    u = np.empty(n + 1)
    for parts in lines[4 + nb:]:
        k = int(parts[1])
        bin_of[k] = int(parts[2])
        u[k] = float.fromhex(parts[3])
    return BinnedGrid(n, BinLayout(edges, bases, name), bin_of, u)
