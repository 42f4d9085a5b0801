"""Double-double ("pair") arithmetic used as the extended-precision oracle.

A value is the unevaluated sum ``hi + lo`` of two binary64 numbers with
``hi == fl(hi + lo)``.  The kernels below only use ``+ - * /`` so they run
unchanged on Python floats and on numpy arrays; :class:`ExtReal` wraps the
scalar case and :class:`DDArray` the vectorised one.

All error-free transformations assume round-to-nearest-even binary64
arithmetic (see :func:`rounding_mode_ok`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import DomainError, RangeError

_SPLITTER = 134217729.0  # 2**27 + 1
_TINY = 2.0**-969  # below this the split / two_prod residuals can go subnormal
_SINCOS_LIMIT = 1.0e6

# 100 decimals of pi
_PI_DIGITS = (
    "3.14159265358979323846264338327950288419716939937510"
    "58209749445923078164062862089986280348253421170679"
)
PI_FRACTION = Fraction(_PI_DIGITS)


# ---------------------------------------------------------------------------
# error-free transformations
# ---------------------------------------------------------------------------


def two_sum(a, b):
    """Return ``(s, e)`` with ``s = fl(a + b)`` and ``s + e == a + b`` exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def fast_two_sum(a, b):
    # requires |a| >= |b| (or a == 0)
    s = a + b
    e = b - (s - a)
    return s, e


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Return ``(p, e)`` with ``p = fl(a * b)`` and ``p + e == a * b`` exactly."""
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


# ---------------------------------------------------------------------------
# pair kernels on (hi, lo)
# ---------------------------------------------------------------------------


def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = fast_two_sum(s, e)
    e = e + f
    return fast_two_sum(s, e)


def dd_add_d(ah, al, b):
    s, e = two_sum(ah, b)
    e = e + al
    return fast_two_sum(s, e)


def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return fast_two_sum(p, e)


def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e = e + al * b
    return fast_two_sum(p, e)


def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = dd_mul_d(bh, bl, q1)
    rh, rl = dd_add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = dd_mul_d(bh, bl, q2)
    rh, rl = dd_add(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = fast_two_sum(q1, q2)
    return dd_add_d(q1, q2, q3)


def dd_from_fraction(value: Fraction) -> tuple[float, float]:
    hi = float(value)
    lo = float(value - Fraction(hi))
    return hi, lo


def _words(value: Fraction, count: int) -> tuple[float, ...]:
    out = []
    rest = value
    for _ in range(count):
        w = float(rest)
        out.append(w)
        rest -= Fraction(w)
    return tuple(out)


PI = dd_from_fraction(PI_FRACTION)
_PIO2_WORDS = _words(PI_FRACTION / 2, 4)

_SIN_COEFFS = [
    dd_from_fraction(Fraction((-1) ** k, math.factorial(2 * k + 1))) for k in range(15)
]
_COS_COEFFS = [
    dd_from_fraction(Fraction((-1) ** k, math.factorial(2 * k))) for k in range(16)
]


def _horner(coeffs, xh, xl):
    ah, al = coeffs[-1]
    for ch, cl in reversed(coeffs[:-1]):
        ah, al = dd_mul(ah, al, xh, xl)
        ah, al = dd_add(ah, al, ch, cl)
    return ah, al


def dd_sincos(xh, xl):
    """Vectorised ``(sin, cos)`` of pairs; |x| must not exceed 1e6.

    Reduction subtracts ``q * pi/2`` using a four-word pi/2 with every
    ``q * word`` product formed exactly, then a Taylor series is summed on
    the reduced argument (|r| <= pi/4 + tiny).
    """
    xh = np.asarray(xh, dtype=np.float64)
    xl = np.asarray(xl, dtype=np.float64)
    if xh.size and np.max(np.abs(xh)) > _SINCOS_LIMIT:
        raise DomainError("sincos argument exceeds reduction range 1e6")
    c1, c2, c3, c4 = _PIO2_WORDS
    q = np.rint(xh / c1)
    ph, pl = two_prod(q, c1)
    rh = xh - ph  # exact (Sterbenz) whenever q != 0
    rl = np.zeros_like(rh)
    rh, rl = dd_add_d(rh, rl, xl)
    rh, rl = dd_add_d(rh, rl, -pl)
    qh, ql = two_prod(q, c2)
    rh, rl = dd_add_d(rh, rl, -qh)
    rh, rl = dd_add_d(rh, rl, -ql)
    qh, ql = two_prod(q, c3)
    rh, rl = dd_add_d(rh, rl, -qh)
    rh, rl = dd_add_d(rh, rl, -(ql + q * c4))

    r2h, r2l = dd_mul(rh, rl, rh, rl)
    sh, sl = _horner(_SIN_COEFFS, r2h, r2l)
    sh, sl = dd_mul(sh, sl, rh, rl)
    ch, cl = _horner(_COS_COEFFS, r2h, r2l)

    quad = np.mod(q, 4.0).astype(np.int64)
    sin_h = np.choose(quad, [sh, ch, -sh, -ch])
    sin_l = np.choose(quad, [sl, cl, -sl, -cl])
    cos_h = np.choose(quad, [ch, -sh, -ch, sh])
    cos_l = np.choose(quad, [cl, -sl, -cl, sl])
    return (sin_h, sin_l), (cos_h, cos_l)


def rounding_mode_ok() -> bool:
    """Probe that binary64 addition rounds to nearest, ties to even."""
    tie_down = 1.0 + 2.0**-53 == 1.0
    tie_up = (1.0 + 2.0**-52) + 2.0**-53 == 1.0 + 2.0**-51
    neg = -1.0 - 2.0**-53 == -1.0
    s, e = two_sum(1.0, 2.0**-60)
    return tie_down and tie_up and neg and s == 1.0 and e == 2.0**-60


# ---------------------------------------------------------------------------
# scalar type
# ---------------------------------------------------------------------------


def _check(hi: float, lo: float) -> "ExtReal":
    if not (math.isfinite(hi) and math.isfinite(lo)):
        raise RangeError("pair arithmetic overflowed")
    if hi != 0.0 and abs(hi) < _TINY:
        raise RangeError("pair arithmetic underflowed")
    if hi == 0.0:
        lo = 0.0
    return ExtReal(hi, lo)


Number = Union[int, float, Fraction, "ExtReal"]


@dataclass(frozen=True)
class ExtReal:
    """An immutable pair ``hi + lo`` with ``hi == fl(hi + lo)``."""

    hi: float
    lo: float = 0.0

    @classmethod
    def from_fraction(cls, value: Fraction) -> "ExtReal":
        return cls(*dd_from_fraction(Fraction(value)))

    @classmethod
    def from_str(cls, text: str) -> "ExtReal":
        return cls.from_fraction(Fraction(text))

    @classmethod
    def coerce(cls, value: Number) -> "ExtReal":
        if isinstance(value, ExtReal):
            return value
        if isinstance(value, (Fraction, int)):
            return cls.from_fraction(Fraction(value))
        return cls(float(value), 0.0)

    def to_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def __float__(self) -> float:
        return ext_to_double(self)

    def __neg__(self) -> "ExtReal":
        return ExtReal(-self.hi, -self.lo)

    def __abs__(self) -> "ExtReal":
        return -self if self.hi < 0 else self

    def __add__(self, other: Number) -> "ExtReal":
        if isinstance(other, DDArray):
            return NotImplemented
        return ext_add(self, ExtReal.coerce(other))

    __radd__ = __add__

    def __sub__(self, other: Number) -> "ExtReal":
        if isinstance(other, DDArray):
            return NotImplemented
        return ext_add(self, -ExtReal.coerce(other))

    def __rsub__(self, other: Number) -> "ExtReal":
        return ext_add(ExtReal.coerce(other), -self)

    def __mul__(self, other: Number) -> "ExtReal":
        if isinstance(other, DDArray):
            return NotImplemented
        return ext_mul(self, ExtReal.coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "ExtReal":
        if isinstance(other, DDArray):
            return NotImplemented
        return ext_div(self, ExtReal.coerce(other))

    def __rtruediv__(self, other: Number) -> "ExtReal":
        return ext_div(ExtReal.coerce(other), self)

    def _key(self) -> tuple[float, float]:
        return (self.hi, self.lo)

    def __lt__(self, other: Number) -> bool:
        return self._key() < ExtReal.coerce(other)._key()

    def __le__(self, other: Number) -> bool:
        return self._key() <= ExtReal.coerce(other)._key()

    def __gt__(self, other: Number) -> bool:
        return self._key() > ExtReal.coerce(other)._key()

    def __ge__(self, other: Number) -> bool:
        return self._key() >= ExtReal.coerce(other)._key()


def ext_add(a: ExtReal, b: ExtReal) -> ExtReal:
    return _check(*dd_add(a.hi, a.lo, b.hi, b.lo))


def ext_sub(a: ExtReal, b: ExtReal) -> ExtReal:
    return ext_add(a, -b)


def ext_mul(a: ExtReal, b: ExtReal) -> ExtReal:
    return _check(*dd_mul(a.hi, a.lo, b.hi, b.lo))


def ext_div(a: ExtReal, b: ExtReal) -> ExtReal:
    if b.hi == 0.0:
        raise DomainError("division by zero")
    return _check(*dd_div(a.hi, a.lo, b.hi, b.lo))


def ext_sincos(x: ExtReal) -> tuple[ExtReal, ExtReal]:
    (sh, sl), (ch, cl) = dd_sincos(np.array([x.hi]), np.array([x.lo]))
    return ExtReal(float(sh[0]), float(sl[0])), ExtReal(float(ch[0]), float(cl[0]))


def ext_to_double(a: ExtReal) -> float:
    out = a.hi + a.lo  # one rounding of the exact sum
    if math.isinf(out):
        warnings.warn("pair value saturated to infinity", RuntimeWarning, stacklevel=2)
    return out


EXT_PI = ExtReal(*PI)


# ---------------------------------------------------------------------------
# array type
# ---------------------------------------------------------------------------


def _parts(value):
    if isinstance(value, DDArray):
        return value.hi, value.lo
    if isinstance(value, ExtReal):
        return value.hi, value.lo
    arr = np.asarray(value, dtype=np.float64)
    return arr, np.zeros_like(arr)


class DDArray:
    """Vector of pairs stored as two float64 arrays.

    Arithmetic accepts other DDArrays, ExtReal scalars, floats or float
    arrays and broadcasts like numpy.  No range checks are made here; the
    callers keep magnitudes bounded.
    """

    __array_ufunc__ = None  # make ndarray <op> DDArray defer to us

    def __init__(self, hi, lo=None):
        self.hi = np.asarray(hi, dtype=np.float64)
        self.lo = np.zeros_like(self.hi) if lo is None else np.asarray(lo, dtype=np.float64)

    @classmethod
    def zeros(cls, shape) -> "DDArray":
        return cls(np.zeros(shape), np.zeros(shape))

    @classmethod
    def from_fractions(cls, values) -> "DDArray":
        pairs = [dd_from_fraction(Fraction(v)) for v in values]
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @classmethod
    def from_ext(cls, values) -> "DDArray":
        return cls([v.hi for v in values], [v.lo for v in values])

    def __len__(self) -> int:
        return len(self.hi)

    @property
    def shape(self):
        return self.hi.shape

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return ExtReal(float(self.hi[idx]), float(self.lo[idx]))
        return DDArray(self.hi[idx], self.lo[idx])

    def __repr__(self) -> str:
        return f"DDArray(hi={self.hi!r}, lo={self.lo!r})"

    def copy(self) -> "DDArray":
        return DDArray(self.hi.copy(), self.lo.copy())

    def to_double(self) -> np.ndarray:
        return self.hi + self.lo

    def to_fractions(self) -> list[Fraction]:
        return [Fraction(float(h)) + Fraction(float(l)) for h, l in zip(self.hi, self.lo)]

    def __neg__(self) -> "DDArray":
        return DDArray(-self.hi, -self.lo)

    def __abs__(self) -> "DDArray":
        sign = np.where(self.hi < 0, -1.0, 1.0)
        return DDArray(sign * self.hi, sign * self.lo)

    def __add__(self, other) -> "DDArray":
        bh, bl = _parts(other)
        return DDArray(*dd_add(self.hi, self.lo, bh, bl))

    __radd__ = __add__

    def __sub__(self, other) -> "DDArray":
        bh, bl = _parts(other)
        return DDArray(*dd_add(self.hi, self.lo, -bh, -bl))

    def __rsub__(self, other) -> "DDArray":
        return (-self) + other

    def __mul__(self, other) -> "DDArray":
        bh, bl = _parts(other)
        return DDArray(*dd_mul(self.hi, self.lo, bh, bl))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DDArray":
        bh, bl = _parts(other)
        return DDArray(*dd_div(self.hi, self.lo, bh, bl))

    def __rtruediv__(self, other) -> "DDArray":
        ah, al = _parts(other)
        return DDArray(*dd_div(ah, al, self.hi, self.lo))

    def ldexp(self, exponent) -> "DDArray":
        return DDArray(np.ldexp(self.hi, exponent), np.ldexp(self.lo, exponent))

    def sum(self) -> ExtReal:
        """Sequential pair summation (fixed order, deterministic)."""
        sh, sl = 0.0, 0.0
        for h, l in zip(self.hi.tolist(), self.lo.tolist()):
            sh, sl = dd_add(sh, sl, h, l)
        return ExtReal(sh, sl)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.to_double()))) if self.hi.size else 0.0


def dd_diff(a, b) -> DDArray:
    """Exact difference of two float arrays as pairs."""
    return DDArray(*two_sum(np.asarray(a, dtype=np.float64), -np.asarray(b, dtype=np.float64)))


def dd_sin_cos(x: DDArray) -> tuple[DDArray, DDArray]:
    (sh, sl), (ch, cl) = dd_sincos(x.hi, x.lo)
    return DDArray(sh, sl), DDArray(ch, cl)
