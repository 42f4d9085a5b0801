"""Node-rounding error analysis in pair precision.

Everything here works on a :class:`RoundedGrid`: the exact Chebyshev nodes
x_k as pairs, the nodes actually used (rounded as usual, or rebuilt from a
binned representation) and the exact normalized weights.  From these we get

* r_jk = (xh_k - xh_j) / (x_k - x_j) - 1, computed as (d_k - d_j) / (x_k - x_j)
  with d = xh - x, which loses nothing to cancellation;
* z_k = lambda_k(x) / lambda_k(xh) - 1 = prod_{j != k} (1 + r_jk) - 1;
* the Error Polynomial E = P_yz - P_y P_z, its factors L and Q, the rows
  a_kj and the linear-programming coefficient b_n;
* a report of numerically evaluated inequalities (:func:`bound_suite`).

Interpolants P_v at the rounded nodes use the weights lambda(x) / (1 + z),
i.e. the exact normalized lambda of the rounded nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .binned import BinLayout, BinnedGrid, gen_binned_nodes
from .cheb_core import (PairDiffs, _fill_hits, _first_exponent, _lambda_ext, bary_sums_ext,
                        chebyshev_lambda_ext, gen_nodes_ext, gen_nodes_usual, lebesgue_estimate,
                        rho_estimate, sample_points)
from .errors import DomainError
from .extprec import DDArray

LAMBDA_MARGIN = 1.01  # sampled Lebesgue estimates are lower bounds
Q_MIN_L = 1e-6
Z_STATS_WINDOW = 32
Z_MODEL_EPS = 2.0**-53


@dataclass
class RoundedGrid:
    """Exact nodes, the nodes actually used, and the exact normalized weights."""

    n: int
    exact: DDArray
    rounded: DDArray
    lam_exact: DDArray
    layout: str = "usual"
    theta: float = 0.0
    binned: Optional[BinnedGrid] = None

    @property
    def size(self) -> int:
        return self.n + 1

    def rounded_double(self) -> np.ndarray:
        return self.rounded.to_double()


def usual_grid(n: int) -> RoundedGrid:
    x = gen_nodes_ext(n)
    xh = DDArray(gen_nodes_usual(n).nodes)
    return RoundedGrid(n, x, xh, chebyshev_lambda_ext(n), "usual", _theta(xh - x, x))


def binned_grid(n: int, layout: BinLayout) -> RoundedGrid:
    x = gen_nodes_ext(n)
    bg = gen_binned_nodes(n, layout)
    base = bg.layout.bases[bg.bin_of]
    u_exact = x - base
    theta = _theta(DDArray(bg.u) - u_exact, u_exact)
    return RoundedGrid(n, x, bg.node_pairs(), chebyshev_lambda_ext(n), layout.name, theta, bg)


def custom_grid(exact: DDArray, rounded, lam_exact: Optional[DDArray] = None,
                layout: str = "custom") -> RoundedGrid:
    """Arbitrary node sets, mostly for tests.  lambda is computed if not given."""
    rounded = rounded if isinstance(rounded, DDArray) else DDArray(rounded)
    if lam_exact is None:
        lam_exact = _lambda_ext(exact)
    return RoundedGrid(len(exact) - 1, exact, rounded, lam_exact, layout,
                       _theta(rounded - exact, exact))


def _theta(err: DDArray, ref: DDArray) -> float:
    e, r = err.to_double(), ref.to_double()
    mask = r != 0.0
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(e[mask] / r[mask])))


# ---------------------------------------------------------------------------
# r and z
# ---------------------------------------------------------------------------


def _check_increasing(x: DDArray, what: str) -> None:
    step = (x[1:] - x[:-1]).to_double()
    if np.any(step == 0.0):
        raise DomainError(f"coincident {what} nodes")
    if np.any(step < 0.0):
        raise DomainError(f"{what} nodes must be increasing")


def _r_vector(x: DDArray, d: DDArray, k: int) -> DDArray:
    # r is symmetric in (j, k), so this is both a row and a column
    num = d - d[k]
    den = x - x[k]
    num.hi[k] = num.lo[k] = 0.0
    den.hi[k], den.lo[k] = 1.0, 0.0
    return num / den


def r_row(x_ext: DDArray, xhat, k: int) -> DDArray:
    """r_jk for all j (entry k is 0)."""
    xhat = xhat if isinstance(xhat, DDArray) else DDArray(xhat)
    _check_increasing(x_ext, "exact")
    _check_increasing(xhat, "rounded")
    if not 0 <= k < len(x_ext):
        raise DomainError("node index out of range")
    return _r_vector(x_ext, xhat - x_ext, k)


@dataclass
class ZVector:
    z: DDArray
    s: DDArray  # first-order term sum_j r_jk
    xi: DDArray  # sum_j |r_jk|

    @property
    def norm_inf(self) -> float:
        return self.z.max_abs()

    @property
    def norm_1(self) -> float:
        return float(np.sum(np.abs(self.z.to_double())))

    @property
    def applicable(self) -> np.ndarray:
        """Where xi_k < 1, i.e. where the sandwich bounds are meaningful."""
        return self.xi.to_double() < 1.0

    def sandwich_bounds(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(lower, z - s, upper); NaN bounds where xi_k >= 1."""
        xi = self.xi.to_double()
        ok = xi < 1.0
        xs = np.where(ok, xi, 0.0)
        lower = -xs**2 / (1.0 - xs) ** 3 * (1.0 + xs**2 / 4.0)
        upper = xs**2 / (1.0 - xs)
        lower[~ok] = np.nan
        upper[~ok] = np.nan
        return lower, (self.z - self.s).to_double(), upper


def z_from_r(x_ext: DDArray, xhat) -> ZVector:
    """z_k = prod_{j != k} (1 + r_jk) - 1, accumulated as z <- z + r + z r."""
    xhat = xhat if isinstance(xhat, DDArray) else DDArray(xhat)
    _check_increasing(x_ext, "exact")
    _check_increasing(xhat, "rounded")
    m = len(x_ext)
    d = xhat - x_ext
    z, s, xi = DDArray.zeros(m), DDArray.zeros(m), DDArray.zeros(m)
    for j in range(m):
        r = _r_vector(x_ext, d, j)
        z = z + r + z * r
        s = s + r
        xi = xi + abs(r)
    return ZVector(z, s, xi)


def z_from_lambda(x_ext: DDArray, xhat) -> DDArray:
    """Cross-check path: lambda(x) / lambda(xh) - 1 via exponent-tracked products."""
    xhat = xhat if isinstance(xhat, DDArray) else DDArray(xhat)
    return _lambda_ext(x_ext) / _lambda_ext(xhat) - 1.0


def compute_z(grid: RoundedGrid) -> ZVector:
    return z_from_r(grid.exact, grid.rounded)


def rounded_weights(grid: RoundedGrid, zvec: ZVector) -> DDArray:
    """Normalized lambda of the rounded nodes: lambda(x) / (1 + z)."""
    return grid.lam_exact / (zvec.z + 1.0)


# ---------------------------------------------------------------------------
# Error Polynomial
# ---------------------------------------------------------------------------


def _points(t) -> DDArray:
    if isinstance(t, DDArray):
        return t
    return DDArray(np.atleast_1d(np.asarray(t, dtype=np.float64)))


def _as_dd(v) -> DDArray:
    return v if isinstance(v, DDArray) else DDArray(np.asarray(v, dtype=np.float64))


def interpolants(t, grid: RoundedGrid, values, zvec: ZVector) -> list[DDArray]:
    """P_v(t) at the rounded nodes for each value vector in ``values``."""
    vals = [_as_dd(v) for v in values]
    w = rounded_weights(grid, zvec)
    sums = bary_sums_ext(PairDiffs(_points(t), grid.rounded), w, vals)
    out = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for num, v in zip(sums.nums, vals):
            out.append(_fill_hits(num / sums.den, sums.hit, v))
    return out


def error_poly_E(t, grid: RoundedGrid, y, zvec: ZVector) -> DDArray:
    """E(t) = P_yz(t) - P_y(t) P_z(t)."""
    y = _as_dd(y)
    p_y, p_z, p_yz = interpolants(t, grid, [y, zvec.z, y * zvec.z], zvec)
    return p_yz - p_y * p_z


def _node_pairs(nodes) -> DDArray:
    if isinstance(nodes, RoundedGrid):
        return nodes.rounded
    if isinstance(nodes, DDArray):
        return nodes
    return DDArray(np.asarray(getattr(nodes, "nodes", nodes), dtype=np.float64))


def L_factor(t, nodes) -> np.ndarray:
    """L(t) = 2**(n-1) prod_k (t - x_k) / sqrt(1 - t**2), exponent tracked.

    For the exact Chebyshev nodes this is -sin(n arccos t).
    """
    x = _node_pairs(nodes)
    pts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(np.abs(pts) >= 1.0):
        raise DomainError("L is only defined for |t| < 1")
    tp = DDArray(pts)
    mant = np.ones(pts.size)
    expo = np.zeros(pts.size, dtype=np.int64)
    for k in range(len(x)):
        fm, fe = np.frexp((tp - x[k]).hi)
        mant *= fm
        expo += fe
        if k % 256 == 255:
            mant, e2 = np.frexp(mant)
            expo += e2
    n = len(x) - 1
    return np.ldexp(mant, expo + (n - 1)) / np.sqrt((1.0 - pts) * (1.0 + pts))


def Q_factor(t, grid: RoundedGrid, y, zvec: ZVector):
    """Q = E / L with points where |L| < 1e-6 marked NaN.  Returns (Q, E, L)."""
    pts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    E = error_poly_E(pts, grid, y, zvec)
    L = L_factor(pts, grid)
    skip = np.abs(L) < Q_MIN_L
    Q = E / np.where(skip, 1.0, L)
    Q.hi[skip] = np.nan
    Q.lo[skip] = np.nan
    return Q, E, L


# ---------------------------------------------------------------------------
# a_kj and b_n
# ---------------------------------------------------------------------------


def centers(grid: RoundedGrid) -> DDArray:
    x = grid.rounded
    return (x[:-1] + x[1:]) * 0.5


def akj_row(grid: RoundedGrid, zvec: ZVector, k: int) -> DDArray:
    """a_kj = (z_j - P_z(c_k)) l_j(c_k), c_k the midpoint of [xh_{k-1}, xh_k]."""
    if not 1 <= k <= grid.n:
        raise DomainError("center index must be in 1..n")
    x = grid.rounded
    c = (x[k - 1] + x[k]) * 0.5
    w = rounded_weights(grid, zvec)
    term = w / (c - x)
    den = term.sum()
    pz = (term * zvec.z).sum() / den
    return (zvec.z - pz) * term / den


@dataclass
class BnResult:
    bn: float
    per_center: np.ndarray  # sum_i h_i |S_ki| for each center
    zero_sum: float  # max_k |sum_j a_kj|


def bn_details(grid: RoundedGrid, zvec: ZVector) -> BnResult:
    """b_n = max_k sum_i (xh_i - xh_{i-1}) |sum_{j >= i} a_kj|, all centers at once."""
    x = grid.rounded
    c = centers(grid)
    w = rounded_weights(grid, zvec)
    sums = bary_sums_ext(PairDiffs(c, x), w, [zvec.z])
    inv_den = 1.0 / sums.den
    pz = sums.nums[0] * inv_den
    S = DDArray.zeros(len(c))
    acc = np.zeros(len(c))
    for j in range(grid.n, -1, -1):
        a = (zvec.z[j] - pz) * (w[j] / (c - x[j])) * inv_den
        S = S + a
        if j >= 1:
            acc += (x[j] - x[j - 1]).hi * np.abs(S.to_double())
    return BnResult(float(np.max(acc)), acc, S.max_abs())


def bn_compute(grid: RoundedGrid, zvec: ZVector) -> float:
    return bn_details(grid, zvec).bn


# ---------------------------------------------------------------------------
# Lipschitz bounds
# ---------------------------------------------------------------------------


def dense_points(nodes: np.ndarray, total: int) -> np.ndarray:
    """About ``total`` points, uniform inside each node interval."""
    x = np.asarray(nodes, dtype=np.float64)
    n = x.size - 1
    s = max(1, -(-total // n))
    frac = np.arange(s) / s
    pts = (x[:-1, None] + (x[1:] - x[:-1])[:, None] * frac[None, :]).ravel()
    return np.append(pts, x[-1])


@dataclass
class LipschitzBounds:
    lp_bound: float
    A: float
    B: float
    lebesgue_v: float
    max_slope: float
    bn: float
    rho: float
    lebesgue_x: float
    sup_err: float


def lipschitz_bounds(grid: RoundedGrid, zvec: ZVector, lip: float,
                     f: Callable[[DDArray], DDArray], samples: int = 16,
                     dense: Optional[int] = None) -> LipschitzBounds:
    """lp_bound = Lambda(v) max|dy/dx| b_n, A = L rho ||z||_1 and
    B = Lambda(xh) ||z||_inf ||f - P_y||_inf (sup over dense sampling)."""
    xd = grid.rounded_double()
    y = f(grid.rounded)
    if zvec.norm_inf == 0.0:
        return LipschitzBounds(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0)
    c = centers(grid).to_double()
    v = np.sort(np.concatenate([xd, c]))
    lam_v = LAMBDA_MARGIN * lebesgue_estimate(v, samples)
    slope = float(np.max(np.abs(((y[1:] - y[:-1]) / (grid.rounded[1:] - grid.rounded[:-1])).to_double())))
    bn = bn_compute(grid, zvec)
    w = rounded_weights(grid, zvec).to_double()
    rho = rho_estimate(xd, samples, weights=w)
    lam_x = LAMBDA_MARGIN * lebesgue_estimate(xd, samples, weights=w)
    pts = dense_points(xd, dense if dense is not None else 256 * grid.size)
    pd = _points(pts)
    (p_y,) = interpolants(pd, grid, [y], zvec)
    sup_err = (f(pd) - p_y).max_abs()
    return LipschitzBounds(lam_v * slope * bn, lip * rho * zvec.norm_1,
                           lam_x * zvec.norm_inf * sup_err, lam_v, slope, bn, rho, lam_x, sup_err)


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------


@dataclass
class ZStats:
    n: int
    norm_inf: float
    norm_1: float
    ratio: float  # ||z||_1 / (||z||_inf ln(n)**2)
    window_center: np.ndarray
    window_std: np.ndarray
    model_k: np.ndarray
    model: np.ndarray  # eps n^2 ln(k) / k
    model_scale: float  # fitted constant c with std ~ c * model on k in [8, n/4]
    z: np.ndarray

    def model_at(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=np.float64)
        return Z_MODEL_EPS * self.n**2 * np.log(k) / k

    def fit_window(self) -> tuple[np.ndarray, np.ndarray]:
        """(window centers, std / (model_scale * model)) over k in [8, n/4]."""
        c = self.window_center
        m = (c >= 8) & (c <= self.n / 4)
        return c[m], self.window_std[m] / (self.model_scale * self.model_at(c[m]))

    def rows(self):
        return [(k, float(v)) for k, v in enumerate(self.z)]


def z_stats(zvec: ZVector, n: int, window: int = Z_STATS_WINDOW) -> ZStats:
    if n + 1 < 64:
        raise DomainError("z statistics need n + 1 >= 64")
    z = zvec.z.to_double()
    starts = np.arange(0, z.size - window + 1, window)
    stds = np.array([np.std(z[s:s + window], ddof=1) for s in starts])
    centers_ = starts + (window - 1) / 2.0
    k = np.arange(2, n // 2 + 1)
    model = Z_MODEL_EPS * n**2 * np.log(k) / k
    ninf, n1 = zvec.norm_inf, zvec.norm_1
    ratio = n1 / (ninf * math.log(n) ** 2) if ninf > 0 else 0.0
    sel = (centers_ >= 8) & (centers_ <= n / 4) & (stds > 0)
    scale = 0.0
    if sel.any():
        c = centers_[sel]
        ref = Z_MODEL_EPS * n**2 * np.log(c) / c
        scale = float(np.exp(np.mean(np.log(stds[sel] / ref))))
    return ZStats(n, ninf, n1, ratio, centers_, stds, k, model, scale, z)


# ---------------------------------------------------------------------------
# bound checks
# ---------------------------------------------------------------------------


@dataclass
class BoundRecord:
    name: str
    lhs: float
    rhs: float
    note: str = ""

    @property
    def satisfied(self) -> bool:
        return bool(self.lhs <= self.rhs)


@dataclass
class BoundReport:
    n: int
    layout: str
    theta: float
    records: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.satisfied for r in self.records)

    def __getitem__(self, name: str) -> BoundRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def failures(self) -> list:
        return [r for r in self.records if not r.satisfied]

    def rows(self):
        return [(r.name, r.lhs, r.rhs, r.satisfied) for r in self.records]


def prod_bound_margins(v) -> dict:
    """Exact check of the product lemma for one vector v with ||v||_1 < 1.

    With s = sum v and d = ||v||_1 the bounds are
        -d^2/(1-d)^3 (1 + d^2/4) <= prod(1+v) - (1+s) <= d^2/(1-d)
    Margins are returned as Fractions (rhs - lhs, >= 0 when the bound holds).
    """
    vs = [Fraction(x) for x in v]
    d = sum(abs(x) for x in vs)
    s = sum(vs)
    prod = Fraction(1)
    for x in vs:
        prod *= 1 + x
    diff = prod - (1 + s)
    lower = -d**2 / (1 - d) ** 3 * (1 + d**2 / 4)
    upper = d**2 / (1 - d)
    return {"lower": diff - lower, "upper": upper - diff}


def _sampled_vectors(count: int = 64, length: int = 12) -> list:
    out = []
    for i in range(count):
        # deterministic pseudo-random vectors from a fixed generator
        gen = np.random.default_rng(1000 + i)
        v = gen.uniform(-1.0, 1.0, size=length)
        budget = 0.05 + 0.9 * i / count
        out.append(v * (budget / np.sum(np.abs(v))))
    return out


def _inv_diff_sums(x: DDArray) -> tuple[np.ndarray, float]:
    """max_k sum_{j != k} 1/|x_k - x_j| per k, and sum_{j >= 1} 1/(x_j - x_0)."""
    m = len(x)
    tot = np.zeros(m)
    for j in range(m):
        d = (x - x[j]).to_double()
        d[j] = np.inf
        tot += 1.0 / np.abs(d)
    end = float(np.sum(1.0 / (x[1:] - x[0]).to_double()))
    return tot, end


def bound_suite(grid: RoundedGrid, zvec: Optional[ZVector] = None, samples: int = 16,
                heavy: Optional[bool] = None) -> BoundReport:
    """Evaluate both sides of every inequality for one rounded grid.

    ``heavy`` enables the checks that need pair evaluation on dense point
    sets (first-formula two-sided bound, second-formula sandwich); by default
    they run for n <= 512.
    """
    n = grid.n
    if n > 2**14:
        raise DomainError("bound suite is limited to n <= 2**14")
    zvec = zvec if zvec is not None else compute_z(grid)
    heavy = n <= 512 if heavy is None else heavy
    rep = BoundReport(n, grid.layout, grid.theta)
    add = rep.records.append
    xi = zvec.xi.to_double()
    delta = float(np.max(xi))

    if grid.binned is None:
        add(BoundRecord("rik_bound", delta, 2.6 * grid.theta * n**2, "max_k xi_k vs 2.6 theta n^2"))
    else:
        rhs = grid.theta * (3.2 + 2.3 * n + 4.3 * n * math.log(n + 1))
        add(BoundRecord("good_rik", delta, rhs, "max_k xi_k vs theta (3.2 + 2.3n + 4.3n ln(n+1))"))

    lower, zs, upper = zvec.sandwich_bounds()
    ok = zvec.applicable
    add(BoundRecord("zk_sandwich_lower", float(np.max(lower[ok] - zs[ok])) if ok.any() else 0.0, 0.0,
                    "max_k (lower_k - (z_k - s_k))"))
    add(BoundRecord("zk_sandwich_upper", float(np.max(zs[ok] - upper[ok])) if ok.any() else 0.0, 0.0,
                    "max_k ((z_k - s_k) - upper_k)"))

    tot, end = _inv_diff_sums(grid.exact)
    add(BoundRecord("inv_diff_sum", float(np.max(tot)), 1.3 * n**2, "max_k sum_j 1/|x_k - x_j| vs 1.3 n^2"))
    add(BoundRecord("inv_endpoint_sum", end, 0.9 * n**2, "sum_j 1/(x_j - x_0) vs 0.9 n^2"))

    xd = grid.rounded_double()
    lam_est = lebesgue_estimate(xd, samples)
    lam = LAMBDA_MARGIN * lam_est
    spacing = float(np.min((grid.exact[1:] - grid.exact[:-1]).to_double()))
    shift = (grid.rounded - grid.exact).max_abs()
    add(BoundRecord("lebesgue_hyp_delta", delta, 0.01, "delta = max xi"))
    add(BoundRecord("lebesgue_hyp_shift", shift, 0.1 * spacing, "||xh - x|| vs 0.1 min spacing"))
    # Lambda is the bounded quantity here, so the sampled estimate is used as is
    add(BoundRecord("lebesgue_bound", lam_est, (1 + 4 * delta) * (2 / math.pi * math.log(n) + 0.97),
                    "sampled Lebesgue estimate (a lower bound)"))

    worst_lo = worst_up = None
    for v in _sampled_vectors():
        m = prod_bound_margins(v)
        worst_lo = m["lower"] if worst_lo is None else min(worst_lo, m["lower"])
        worst_up = m["upper"] if worst_up is None else min(worst_up, m["upper"])
    add(BoundRecord("bound_prod_lower", float(-worst_lo), 0.0, "exact rationals, sampled v"))
    add(BoundRecord("bound_prod_upper", float(-worst_up), 0.0, "exact rationals, sampled v"))

    res = bn_details(grid, zvec)
    add(BoundRecord("akj_zero_sum", res.zero_sum, 1e-28, "max_k |sum_j a_kj|"))

    if heavy:
        y = _test_values(grid)
        terms = _formula_terms(grid, zvec, y)
        for rec in _first_records(grid, zvec, y, lam, terms) + _second_records(grid, zvec, y, lam, terms):
            add(rec)
    return rep


def _test_values(grid: RoundedGrid) -> DDArray:
    # smooth data with unit scale; cos(3t + 1) in pairs
    from .extprec import dd_sin_cos
    _, c = dd_sin_cos(grid.rounded * 3.0 + 1.0)
    return c


def _check_points(grid: RoundedGrid, samples: int = 8) -> np.ndarray:
    return sample_points(grid.rounded_double(), samples)


def _formula_terms(grid: RoundedGrid, zvec: ZVector, y: DDArray, samples: int = 8):
    """p and q (first and second formula with the exact-node weights at the
    rounded nodes) and P_y, P_z, P_yz, on the check points.  p and q share
    one pass over the nodes, the three interpolants another."""
    t = _points(_check_points(grid, samples))
    sums = bary_sums_ext(PairDiffs(t, grid.rounded), grid.lam_exact, [y], with_product=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = _fill_hits((sums.prod * sums.nums[0]).ldexp(_first_exponent(sums, grid.size)), sums.hit, y)
        q = _fill_hits(sums.nums[0] / sums.den, sums.hit, y)
    p_y, p_z, p_yz = interpolants(t, grid, [y, zvec.z, y * zvec.z], zvec)
    return p, q, p_y, p_z, p_yz


def _first_records(grid, zvec, y, lam, terms) -> list:
    p, _, p_y, _, _ = terms
    # the evaluator returns y_k at a node by convention, but the polynomial p
    # has value y_k w_k / lambda_k(xh) there; form it from the direct product
    at_nodes = y * (grid.lam_exact / _lambda_ext(grid.rounded) - 1.0)
    gap = max((p - p_y).max_abs(), at_nodes.max_abs())
    yz = (y * zvec.z).max_abs()
    tol = 2.0**-90 * yz  # the two z paths agree to pair precision, not bitwise
    return [BoundRecord("bound_first_lower", yz - tol, gap, "||yz|| - tol vs max|p - P_y|"),
            BoundRecord("bound_first_upper", gap, lam * yz, "max|p - P_y| vs Lambda ||yz||")]


def _second_records(grid, zvec, y, lam, terms) -> list:
    # both sides are O(eps) and formed from O(1) pair quantities, so each side
    # carries an absolute error of a few units of 2**-104; tol allows for that
    _, q, p_y, p_z, p_yz = terms
    gap = np.abs((q - p_y).to_double())
    E = np.abs((p_yz - p_y * p_z).to_double())
    lz = lam * zvec.norm_inf
    tol = 2.0**-96 * max(1.0, y.max_abs())
    lo = float(np.max(E / (1.0 + lz) - gap - tol))
    hi = float(np.max(gap - E / (1.0 - lz) - tol))
    return [BoundRecord("good_news_lower", lo, 0.0, f"max_t |E|/(1+Lz) - |q-P_y| - tol, tol={tol:.1e}"),
            BoundRecord("good_news_upper", hi, 0.0, f"max_t |q-P_y| - |E|/(1-Lz) - tol, tol={tol:.1e}")]


def first_formula_bounds(grid: RoundedGrid, zvec: ZVector, y: DDArray, lam: float,
                         samples: int = 8) -> list:
    """||yz|| <= max|p - P_y| <= Lambda ||yz|| for p the first formula with
    the exact-node weights evaluated at the rounded nodes."""
    return _first_records(grid, zvec, y, lam, _formula_terms(grid, zvec, y, samples))


def second_formula_bounds(grid: RoundedGrid, zvec: ZVector, y: DDArray, lam: float,
                          samples: int = 8) -> list:
    """|E|/(1 + Lambda||z||) <= |q - P_y| <= |E|/(1 - Lambda||z||) pointwise."""
    return _second_records(grid, zvec, y, lam, _formula_terms(grid, zvec, y, samples))


def backward_check(grid: RoundedGrid, zvec: ZVector, y: DDArray, t, lam: float) -> float:
    """Largest ratio |y'_k - y_k| / ((|z_k| + L||z||)/(1 - L||z||) |y_k|) over
    the points t, with y'_k = y_k nu_k / P(t) and P interpolating nu = 1 + z."""
    nu = zvec.z + 1.0
    (pn,) = interpolants(t, grid, [nu], zvec)
    lz = lam * zvec.norm_inf
    bound = (np.abs(zvec.z.to_double()) + lz) / (1.0 - lz) * np.abs(y.to_double())
    worst = 0.0
    for i in range(len(pn)):
        yp = y * nu / pn[i]
        dev = np.abs((yp - y).to_double())
        mask = bound > 0
        if mask.any():
            worst = max(worst, float(np.max(dev[mask] / bound[mask])))
    return worst
