"""Chebyshev points of the second kind, their weights, and both barycentric formulas.

Working-precision evaluators are vectorised over evaluation points in
(nodes x points) blocks; the pair-precision evaluators in
:func:`bary_sums_ext` loop over nodes and vectorise over points.

The first formula is evaluated in the scaled form

    p(t) = 1/2 * prod_k 2 (t - x_k) * sum_k w_k y_k / (t - x_k),
    w_k  = lambda_k * 2**-n,

with the running product carried as (significand, integer exponent) so
nothing overflows for large n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np

from .errors import DomainError, UsageError
from .extprec import DDArray, PI, dd_diff, dd_div, dd_mul, dd_sincos

NORMALIZED_LAMBDA = "normalized_lambda"
SALZER_SIMPLIFIED = "salzer_simplified"

_BLOCK_ELEMS = 1 << 21  # working-precision block size (nodes * points)
_PROD_BLOCK = 512  # mantissas in [0.5, 1): a block product stays >= 2**-512
_TINY_T = 2.0**-900  # points closer than this to the node at 0 get rescaled


@dataclass(frozen=True)
class Grid:
    n: int
    nodes: np.ndarray
    nodes_ext: Optional[DDArray] = None

    @property
    def size(self) -> int:
        return self.n + 1


@dataclass(frozen=True)
class WeightVector:
    values: np.ndarray
    kind: str
    provenance: str
    ext: Optional[DDArray] = None


# ---------------------------------------------------------------------------
# nodes
# ---------------------------------------------------------------------------


def gen_nodes_usual(n: int) -> Grid:
    """Nodes x_k = sin((2k - n) pi / (2n)) evaluated in binary64."""
    if not 1 <= n <= 2**24:
        raise DomainError(f"degree {n} outside [1, 2**24]")
    args = ((2 * k - n) / (2 * n) * math.pi for k in range(n + 1))
    nodes = np.fromiter((math.sin(a) for a in args), dtype=np.float64, count=n + 1)
    nodes[0], nodes[-1] = -1.0, 1.0
    return Grid(n, nodes)


def gen_nodes_ext(n: int) -> DDArray:
    """Exact reference nodes -cos(k pi / n) as pairs."""
    if n < 1:
        raise DomainError("degree must be >= 1")
    k = np.arange(n + 1, dtype=np.float64)
    fh, fl = dd_div(2.0 * k - n, np.zeros(n + 1), np.full(n + 1, 2.0 * n), np.zeros(n + 1))
    ah, al = dd_mul(fh, fl, PI[0], PI[1])
    (sh, sl), _ = dd_sincos(ah, al)
    x = DDArray(sh, sl)
    x.hi[0], x.lo[0] = -1.0, 0.0
    x.hi[-1], x.lo[-1] = 1.0, 0.0
    steps = x[1:] - x[:-1]
    if not np.all(steps.hi > 0):
        raise DomainError("reference nodes are not strictly increasing")
    return x


def salzer_grid(n: int, with_ext: bool = True) -> Grid:
    g = gen_nodes_usual(n)
    return Grid(n, g.nodes, gen_nodes_ext(n) if with_ext else None)


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def _lambda_double(x: np.ndarray) -> np.ndarray:
    m = x.size
    mant = np.ones(m)
    expo = np.zeros(m, dtype=np.int64)
    for j in range(m):
        f = 2.0 * (x - x[j])
        f[j] = 1.0
        if np.any(f == 0.0):
            raise DomainError("duplicate nodes")
        fm, fe = np.frexp(f)
        mant *= fm
        expo += fe
        if j % _PROD_BLOCK == _PROD_BLOCK - 1:
            mant, e2 = np.frexp(mant)
            expo += e2
    mant, e2 = np.frexp(mant)
    expo += e2
    return np.ldexp(1.0 / mant, -expo)


def _lambda_ext(x: DDArray) -> DDArray:
    m = len(x)
    ph, pl = np.ones(m), np.zeros(m)
    expo = np.zeros(m, dtype=np.int64)
    for j in range(m):
        f = (x - x[j]) * 2.0
        f.hi[j], f.lo[j] = 1.0, 0.0
        if np.any(f.hi == 0.0):
            raise DomainError("duplicate nodes")
        fm, fe = np.frexp(f.hi)
        ph, pl = dd_mul(ph, pl, fm, np.ldexp(f.lo, -fe))
        expo += fe
        if j % 16 == 15:
            ph, e2 = np.frexp(ph)
            pl = np.ldexp(pl, -e2)
            expo += e2
    inv = 1.0 / DDArray(ph, pl)
    return inv.ldexp(-expo)


def normalized_lambda(nodes) -> WeightVector:
    """Weights prod_{j != k} 1 / (2 (x_k - x_j)) = lambda_k * 2**-n.

    Accepts binary64 nodes or pair nodes; in the latter case the pair values
    are kept in ``ext`` and ``values`` holds them rounded once.
    """
    if isinstance(nodes, DDArray):
        ext = _lambda_ext(nodes)
        return WeightVector(ext.to_double(), NORMALIZED_LAMBDA, "ext", ext)
    x = np.asarray(nodes, dtype=np.float64)
    return WeightVector(_lambda_double(x), NORMALIZED_LAMBDA, "double")


def chebyshev_lambda_ext(n: int) -> DDArray:
    """Closed form lambda_k 2**-n = (-1)**(n-k) delta_k / (2n) for the exact nodes."""
    k = np.arange(n + 1)
    sign = np.where((n - k) % 2 == 0, 1.0, -1.0)
    delta = np.where((k == 0) | (k == n), 0.5, 1.0)
    num = sign * delta
    hi, lo = dd_div(num, np.zeros(n + 1), np.full(n + 1, 2.0 * n), np.zeros(n + 1))
    return DDArray(hi, lo)


def exact_chebyshev_weights(n: int) -> WeightVector:
    ext = chebyshev_lambda_ext(n)
    return WeightVector(ext.to_double(), NORMALIZED_LAMBDA, "ext", ext)


def salzer_weights(n: int) -> WeightVector:
    if n < 1:
        raise DomainError("degree must be >= 1")
    k = np.arange(n + 1)
    vals = np.where(k % 2 == 0, 1.0, -1.0)
    vals[0] *= 0.5
    vals[-1] *= 0.5
    return WeightVector(vals, SALZER_SIMPLIFIED, "closed form")


# ---------------------------------------------------------------------------
# working-precision evaluation
# ---------------------------------------------------------------------------


def _node_blocks(t: np.ndarray, n_nodes: int):
    step = max(1, _BLOCK_ELEMS // max(n_nodes, 1))
    for start in range(0, t.size, step):
        yield slice(start, min(start + step, t.size))


def tiny_exponents(t: np.ndarray) -> Optional[np.ndarray]:
    """Binary exponents e of points with 0 < |t| < 2**-900, else 0; None when
    there are no such points.  Terms w / (t - x_k) are multiplied by 2**e so
    the one at x_k = 0 stays finite; the others underflow harmlessly."""
    tiny = (np.abs(t) < _TINY_T) & (t != 0.0)
    if not tiny.any():
        return None
    e = np.zeros(t.shape, dtype=np.int64)
    e[tiny] = np.frexp(t[tiny])[1]
    return e


def _terms(w: np.ndarray, diff: np.ndarray, e: Optional[np.ndarray]) -> np.ndarray:
    if e is None:
        return w[:, None] / diff
    return w[:, None] * (np.ldexp(1.0, e)[None, :] / diff)


def _first_from_diffs(diff: np.ndarray, wy: np.ndarray, y: np.ndarray,
                      scale_exp: Optional[np.ndarray] = None) -> np.ndarray:
    """diff has shape (nodes, points); reductions run along nodes in node order."""
    hit = diff == 0.0
    m, e = np.frexp(diff)
    mant = np.ones(diff.shape[1])
    expo = e.sum(axis=0, dtype=np.int64) + (diff.shape[0] - 1)
    for b in range(0, diff.shape[0], _PROD_BLOCK):
        mant = mant * np.prod(m[b:b + _PROD_BLOCK], axis=0)
        mant, e2 = np.frexp(mant)
        expo += e2
    s = np.add.reduce(_terms(wy, diff, scale_exp), axis=0)
    if scale_exp is not None:
        expo -= scale_exp
    out = np.ldexp(mant * s, expo)
    hits = hit.any(axis=0)
    if hits.any():
        out[hits] = y[np.argmax(hit[:, hits], axis=0)]
    return out


def _second_from_diffs(diff: np.ndarray, w: np.ndarray, y: np.ndarray,
                       e: Optional[np.ndarray] = None) -> np.ndarray:
    hit = diff == 0.0
    a = _terms(w, diff, e)
    num = np.add.reduce(a * y[:, None], axis=0)
    den = np.add.reduce(a, axis=0)
    out = num / den
    hits = hit.any(axis=0)
    if hits.any():
        out[hits] = y[np.argmax(hit[:, hits], axis=0)]
    return out


def _as_points(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=np.float64)
    return np.atleast_1d(arr), arr.ndim == 0


def first_formula_eval(t, grid: Grid, y, w: WeightVector):
    if w.kind != NORMALIZED_LAMBDA:
        raise UsageError("first formula needs normalized-lambda weights")
    pts, scalar = _as_points(t)
    y = np.asarray(y, dtype=np.float64)
    wy = w.values * y
    out = np.empty_like(pts)
    with np.errstate(divide="ignore", invalid="ignore"):
        for sl in _node_blocks(pts, grid.size):
            diff = pts[None, sl] - grid.nodes[:, None]
            out[sl] = _first_from_diffs(diff, wy, y, tiny_exponents(pts[sl]))
    return float(out[0]) if scalar else out


def second_formula_eval(t, grid: Grid, y, w: WeightVector):
    pts, scalar = _as_points(t)
    y = np.asarray(y, dtype=np.float64)
    out = np.empty_like(pts)
    with np.errstate(divide="ignore", invalid="ignore"):
        for sl in _node_blocks(pts, grid.size):
            diff = pts[None, sl] - grid.nodes[:, None]
            out[sl] = _second_from_diffs(diff, w.values, y, tiny_exponents(pts[sl]))
    return float(out[0]) if scalar else out


def lagrange_basis_at(t: float, grid: Grid, w: WeightVector) -> np.ndarray:
    diff = t - grid.nodes
    hit = np.flatnonzero(diff == 0.0)
    if hit.size:
        out = np.zeros(grid.size)
        out[hit[0]] = 1.0
        return out
    a = w.values / diff
    return a / a.sum()


# ---------------------------------------------------------------------------
# Lebesgue function and rho
# ---------------------------------------------------------------------------


def sample_points(nodes: np.ndarray, samples_per_interval: int = 32) -> np.ndarray:
    """Uniform interior samples x_k + h i / s (nested when s doubles) plus four
    near-node points per interval: both adjacent floats and two points at
    relative distance 2**-20 from the ends."""
    x = np.asarray(nodes, dtype=np.float64)
    s = samples_per_interval
    left, right = x[:-1], x[1:]
    h = right - left
    frac = np.arange(1, s) / s
    uniform = (left[:, None] + h[:, None] * frac[None, :]).ravel()
    near = np.concatenate([
        np.nextafter(left, np.inf),
        np.nextafter(right, -np.inf),
        left + h * 2.0**-20,
        right - h * 2.0**-20,
    ])
    return np.concatenate([uniform, near])


def _bary_sums(t: np.ndarray, x: np.ndarray, w: np.ndarray):
    """Per point: sum |w/(t-x)| and sum w/(t-x), both multiplied by the
    distance to the nearest node (keeps points next to a node finite), and
    a node-hit mask.  Ratios of the two sums are unaffected by the scaling."""
    idx = np.clip(np.searchsorted(x, t), 1, x.size - 1)
    near = np.where(np.abs(t - x[idx - 1]) <= np.abs(t - x[idx]), idx - 1, idx)
    scale = t - x[near]
    hits = scale == 0.0
    scale[hits] = 1.0
    abs_sum = np.empty_like(t)
    sum_ = np.empty_like(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        for sl in _node_blocks(t, x.size):
            diff = t[None, sl] - x[:, None]
            a = w[:, None] * (scale[None, sl] / diff)
            abs_sum[sl] = np.add.reduce(np.abs(a), axis=0)
            sum_[sl] = np.add.reduce(a, axis=0)
    return abs_sum, sum_, hits, np.abs(scale)


def _weights_for(nodes, weights):
    if weights is not None:
        return np.asarray(getattr(weights, "values", weights), dtype=np.float64)
    return normalized_lambda(np.asarray(nodes, dtype=np.float64)).values


def lebesgue_function(t, nodes, weights=None) -> np.ndarray:
    x = np.asarray(nodes, dtype=np.float64)
    w = _weights_for(x, weights)
    pts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    abs_sum, sum_, hits, _ = _bary_sums(pts, x, w)
    out = abs_sum / np.abs(sum_)
    out[hits] = 1.0
    return out


def lebesgue_estimate(nodes, samples_per_interval: int = 32, weights=None) -> float:
    """Sampled lower bound on the Lebesgue constant of ``nodes``."""
    if samples_per_interval < 8:
        raise DomainError("need at least 8 samples per interval")
    x = np.asarray(nodes, dtype=np.float64)
    pts = sample_points(x, samples_per_interval)
    return float(max(1.0, np.max(lebesgue_function(pts, x, weights))))


def rho_estimate(nodes, samples_per_interval: int = 32, weights=None) -> float:
    """Sampled max over t and k of |l_k(t) (t - x_k)| = max|w| / |sum w/(t-x)|."""
    if samples_per_interval < 8:
        raise DomainError("need at least 8 samples per interval")
    x = np.asarray(nodes, dtype=np.float64)
    w = _weights_for(x, weights)
    pts = sample_points(x, samples_per_interval)
    _, sum_, hits, scale = _bary_sums(pts, x, w)
    vals = np.max(np.abs(w)) * scale / np.abs(sum_)
    vals[hits] = 0.0
    return float(np.max(vals))


# ---------------------------------------------------------------------------
# pair-precision evaluation
# ---------------------------------------------------------------------------


class DiffSource(Protocol):
    """Produces t - x_k for every evaluation point, exactly or nearly so."""

    n_points: int
    n_nodes: int
    t_hi: np.ndarray  # leading part of each point

    def diff(self, k: int) -> DDArray: ...


class FloatDiffs:
    """Binary64 points against binary64 nodes; differences are exact."""

    def __init__(self, t, nodes):
        self.t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        self.x = np.asarray(nodes, dtype=np.float64)
        self.t_hi = self.t
        self.n_points = self.t.size
        self.n_nodes = self.x.size

    def diff(self, k: int) -> DDArray:
        return dd_diff(self.t, self.x[k])


class PairDiffs:
    """Pair points against pair nodes."""

    def __init__(self, t: DDArray, nodes: DDArray):
        self.t = t
        self.x = nodes
        self.t_hi = t.hi
        self.n_points = len(t)
        self.n_nodes = len(nodes)

    def diff(self, k: int) -> DDArray:
        return self.t - self.x[k]


@dataclass
class ExtSums:
    den: DDArray  # sum_k w_k / (t - x_k)
    nums: list  # sum_k w_k v_k / (t - x_k), one per value vector
    prod: Optional[DDArray]  # significand of prod_k (t - x_k)
    expo: Optional[np.ndarray]  # its binary exponent
    hit: np.ndarray  # node index hit exactly, or -1
    scale_exp: Optional[np.ndarray] = None  # den and nums carry a factor 2**scale_exp


def bary_sums_ext(src: DiffSource, w: DDArray, values: Sequence[DDArray],
                  with_product: bool = False) -> ExtSums:
    npts = src.n_points
    den = DDArray.zeros(npts)
    nums = [DDArray.zeros(npts) for _ in values]
    hit = np.full(npts, -1, dtype=np.int64)
    ph, pl = np.ones(npts), np.zeros(npts)
    expo = np.zeros(npts, dtype=np.int64)
    e = tiny_exponents(src.t_hi)
    if e is not None:
        # 2**e is applied as 2**e1 on w and 2**-e2 on t - x_k, keeping both normal
        e1 = np.where(e != 0, -600, 0)
        s1, s2 = DDArray(np.ldexp(1.0, e1)), np.ldexp(1.0, e1 - e)
    for k in range(src.n_nodes):
        d = src.diff(k)
        zero = (d.hi == 0.0) & (d.lo == 0.0)
        if zero.any():
            hit[zero] = k
            d.hi[zero] = 1.0
        term = w[k] / d if e is None else (s1 * w[k]) / (d * s2)
        den = den + term
        for i, v in enumerate(values):
            nums[i] = nums[i] + term * v[k]
        if with_product:
            fm, fe = np.frexp(d.hi)
            ph, pl = dd_mul(ph, pl, fm, np.ldexp(d.lo, -fe))
            expo += fe
            if k % 16 == 15:
                ph, e2 = np.frexp(ph)
                pl = np.ldexp(pl, -e2)
                expo += e2
    if with_product:
        prod = DDArray(ph, pl)
        prod.hi[hit >= 0] = 0.0
        prod.lo[hit >= 0] = 0.0
        return ExtSums(den, nums, prod, expo, hit, e)
    return ExtSums(den, nums, None, None, hit, e)


def _first_exponent(sums: ExtSums, n_nodes: int) -> np.ndarray:
    expo = sums.expo + (n_nodes - 1)
    return expo if sums.scale_exp is None else expo - sums.scale_exp


def _fill_hits(out: DDArray, hit: np.ndarray, values: DDArray) -> DDArray:
    idx = np.flatnonzero(hit >= 0)
    if idx.size:
        out.hi[idx] = values.hi[hit[idx]]
        out.lo[idx] = values.lo[hit[idx]]
    return out


def second_formula_ext(src: DiffSource, y: DDArray, w: DDArray) -> DDArray:
    sums = bary_sums_ext(src, w, [y])
    with np.errstate(divide="ignore", invalid="ignore"):
        out = sums.nums[0] / sums.den
    return _fill_hits(out, sums.hit, y)


def first_formula_ext(src: DiffSource, y: DDArray, w: DDArray) -> DDArray:
    """prod_k (t - x_k) * sum_k w_k y_k / (t - x_k) with w in normalized-lambda
    scaling, i.e. 2**(n+1-1) times the plain product."""
    sums = bary_sums_ext(src, w, [y], with_product=True)
    with np.errstate(invalid="ignore"):
        out = (sums.prod * sums.nums[0]).ldexp(_first_exponent(sums, src.n_nodes))
    return _fill_hits(out, sums.hit, y)


def as_pairs(nodes) -> DDArray:
    if isinstance(nodes, DDArray):
        return nodes
    return DDArray(np.asarray(nodes, dtype=np.float64))
