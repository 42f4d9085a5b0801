import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barycheb.errors import DomainError, RangeError
from barycheb.extprec import (EXT_PI, DDArray, ExtReal, dd_sincos, ext_add, ext_div, ext_mul,
                              ext_sincos, ext_sub, ext_to_double, rounding_mode_ok, two_prod,
                              two_sum)

mpmath.mp.prec = 200

# normal range: sums and products stay clear of overflow and of the subnormal band
finite = st.floats(min_value=-1e140, max_value=1e140, allow_nan=False).filter(
    lambda v: v == 0.0 or abs(v) > 1e-140)
moderate = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).filter(
    lambda v: v == 0.0 or abs(v) > 1e-100)


def rel(a: ExtReal, exact) -> float:
    exact = Fraction(exact)
    if exact == 0:
        return abs(float(a.to_fraction()))
    return abs(float((a.to_fraction() - exact) / exact))


def test_rounding_probe():
    assert rounding_mode_ok()


class TestAdd:
    def test_tiny_addend_kept(self):
        r = ExtReal(1.0) + ExtReal(2.0**-60)
        assert (r.hi, r.lo) == (1.0, 2.0**-60)

    def test_cancellation(self):
        r = ext_add(ExtReal(0.1), ExtReal(-0.1))
        assert (r.hi, r.lo) == (0.0, 0.0)

    def test_low_word_survives(self):
        r = ExtReal(1.0, 2.0**-60) + ExtReal(-1.0)
        assert (r.hi, r.lo) == (2.0**-60, 0.0)

    def test_sub_is_negated_add(self):
        a, b = ExtReal(3.0, 1e-17), ExtReal(1.25, -2e-18)
        assert ext_sub(a, b) == ext_add(a, -b)

    @given(finite, finite)
    def test_two_doubles_exact(self, a, b):
        r = ext_add(ExtReal(a), ExtReal(b))
        assert r.to_fraction() == Fraction(a) + Fraction(b)

    def test_overflow_is_range_error(self):
        with pytest.raises(RangeError):
            ext_add(ExtReal(1.7e308), ExtReal(1.7e308))


class TestMul:
    def test_difference_of_squares(self):
        r = ext_mul(ExtReal(1 + 2.0**-30), ExtReal(1 - 2.0**-30))
        assert r.to_fraction() == 1 - Fraction(1, 2**60)

    def test_identity(self):
        x = ExtReal(0.7, 3e-18)
        assert x * 1 == x

    def test_third_roundtrip(self):
        third = ext_div(ExtReal(1.0), ExtReal(3.0))
        assert rel(third * 3, 1) <= 2.0**-100

    @given(finite, finite)
    def test_two_doubles_exact(self, a, b):
        r = ext_mul(ExtReal(a), ExtReal(b))
        assert r.to_fraction() == Fraction(a) * Fraction(b)

    def test_underflow_is_range_error(self):
        with pytest.raises(RangeError):
            ext_mul(ExtReal(1e-160), ExtReal(1e-160))


class TestDiv:
    def test_self(self):
        x = ExtReal(0.3, 1e-18)
        assert rel(x / x, 1) <= 2.0**-98

    def test_power_of_two(self):
        r = ext_div(ExtReal(1.0), ExtReal(-2.0))
        assert (r.hi, r.lo) == (-0.5, 0.0)

    def test_third_digits(self):
        r = ext_div(ExtReal(1.0), ExtReal(3.0))
        digits = mpmath.nstr(mpmath.mpf(r.hi) + mpmath.mpf(r.lo), 40)
        assert digits.startswith("0." + "3" * 30)

    def test_zero_divisor(self):
        with pytest.raises(DomainError):
            ext_div(ExtReal(1.0), ExtReal(0.0))

    @given(moderate, moderate.filter(lambda v: v != 0.0))
    def test_against_fraction(self, a, b):
        assert rel(ext_div(ExtReal(a), ExtReal(b)), Fraction(a) / Fraction(b)) <= 2.0**-98


class TestSinCos:
    def test_zero(self):
        s, c = ext_sincos(ExtReal(0.0))
        assert (s.hi, c.hi, c.lo) == (0.0, 1.0, 0.0)

    def test_sixth(self):
        s, _ = ext_sincos(EXT_PI / 6)
        assert abs(float(s.to_fraction() - Fraction(1, 2))) <= 1e-28

    def test_half(self):
        s, c = ext_sincos(EXT_PI / 2)
        assert abs(float(s.to_fraction() - 1)) <= 1e-28
        assert abs(float(c.to_fraction())) <= 1e-28

    @given(st.floats(min_value=-4 * math.pi, max_value=4 * math.pi))
    def test_against_mpmath(self, x):
        s, c = ext_sincos(ExtReal(x))
        ms, mc = mpmath.sin(mpmath.mpf(x)), mpmath.cos(mpmath.mpf(x))
        for got, ref in ((s, ms), (c, mc)):
            err = abs(mpmath.mpf(got.hi) + mpmath.mpf(got.lo) - ref)
            assert err <= 1e-28 * max(abs(ref), mpmath.mpf(2.0**-60))

    def test_pythagoras_vectorized(self):
        x = np.random.default_rng(7).uniform(-4 * math.pi, 4 * math.pi, 1000)
        s, c = dd_sincos(x, np.zeros_like(x))
        one = DDArray(*s) * DDArray(*s) + DDArray(*c) * DDArray(*c) - 1.0
        assert np.max(np.abs(one.to_double())) <= 1e-27

    def test_large_argument(self):
        # cos(1e4 t) style arguments stay accurate
        x = 9876.54321
        _, c = ext_sincos(ExtReal(x))
        assert abs(mpmath.mpf(c.hi) + mpmath.mpf(c.lo) - mpmath.cos(mpmath.mpf(x))) <= 1e-28

    def test_argument_too_large(self):
        with pytest.raises(DomainError):
            ext_sincos(ExtReal(1e7))


class TestToDouble:
    def test_below_half_ulp(self):
        assert ext_to_double(ExtReal(1.0, 2.0**-60)) == 1.0

    def test_tie_to_even(self):
        assert ext_to_double(ExtReal(1.0, 2.0**-53)) == 1.0

    @given(finite)
    def test_plain(self, x):
        assert ext_to_double(ExtReal(x)) == x


@given(finite, finite)
def test_error_free_transforms(a, b):
    s, e = two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)
    p, q = two_prod(np.float64(a), np.float64(b))
    assert Fraction(float(p)) + Fraction(float(q)) == Fraction(a) * Fraction(b)


@given(st.lists(finite.map(lambda v: v * 1e-140), min_size=1, max_size=20))
def test_ddarray_sum_matches_fraction(values):
    total = DDArray(values).sum()
    exact = sum(Fraction(v) for v in values)
    assert abs(total.to_fraction() - exact) <= abs(exact) * Fraction(1, 2**100) + \
        len(values) * Fraction(2.0**-1100)


def test_ddarray_ops_match_scalar():
    a = DDArray([0.1, -2.5, 3.0], [1e-18, 0.0, -1e-17])
    b = ExtReal(0.7, 2e-18)
    prod = a * b
    for i in range(3):
        assert prod[i] == a[i] * b
    assert (a - a).max_abs() == 0.0


def test_pair_invariant_holds():
    x = np.random.default_rng(3).uniform(-1, 1, 200)
    y = np.random.default_rng(4).uniform(0.5, 2, 200)
    q = DDArray(x) / DDArray(y)
    assert np.all(q.hi == q.hi + q.lo)
    assert np.all(np.abs(q.lo) <= 2.0**-53 * np.abs(q.hi))
