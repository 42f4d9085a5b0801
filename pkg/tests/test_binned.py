import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barycheb import binned as bn
from barycheb import cheb_core as cc
from barycheb import harness
from barycheb.errors import ConstructionError, DomainError, UsageError
from barycheb.extprec import DDArray

mpmath.mp.prec = 200

unit = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


def exact_node(n, k):
    return -mpmath.cos(k * mpmath.pi / n)


class TestLayouts:
    def test_three(self):
        lay = bn.layout_three()
        assert lay.bases.tolist() == [-1.0, 0.0, 1.0]
        assert lay.edges.tolist() == [-1.0, -0.5, 0.5, 1.0]
        assert bn.verify_layout(lay).passed

    @pytest.mark.parametrize("levels,count", [(10, 39), (20, 79), (2, 7)])
    def test_dyadic_counts(self, levels, count):
        lay = bn.layout_dyadic(levels)
        assert lay.n_bins == count == 4 * levels - 1
        assert bn.verify_layout(lay).passed

    def test_dyadic_base_differences_exhaustive(self):
        b = bn.layout_dyadic(10).bases
        fr = [Fraction(float(v)) for v in b]
        for i in range(b.size):
            diffs = (DDArray(np.full(b.size, b[i])) - DDArray(b))
            for j in range(b.size):
                assert Fraction(float(b[i] - b[j])) == fr[i] - fr[j]
                assert diffs.lo[j] == 0.0

    def test_dyadic_levels_range(self):
        with pytest.raises(DomainError):
            bn.layout_dyadic(1)
        with pytest.raises(DomainError):
            bn.layout_dyadic(41)

    def test_adversarial_base(self):
        lay = bn.adhoc_layout([-1.0, -0.05, 0.05, 1.0], [-1.0, 0.1, 1.0])
        rep = bn.verify_layout(lay)
        assert not rep["sterbenz_coverage"].passed or not rep["edges_partition"].passed \
            or not rep["base_difference_exact"].passed
        assert not rep["base_difference_exact"].passed

    def test_sterbenz_violation_reported(self):
        lay = bn.adhoc_layout([-1.0, -0.2, 0.2, 1.0], [-1.0, 0.0, 1.0])
        assert not bn.verify_layout(lay)["sterbenz_coverage"].passed

    def test_construction_refuses_bad_layout(self):
        with pytest.raises(ConstructionError):
            bn._mirror([-1.0], [-1.0], 0.2, "bad")

    def test_parse(self):
        assert bn.parse_layout("0") is None
        assert bn.parse_layout("3").n_bins == 3
        assert bn.parse_layout("dyadic:10").n_bins == 39
        for bad in ("7", "dyadic:x"):
            with pytest.raises(UsageError):
                bn.parse_layout(bad)


class TestLocate:
    def test_examples(self):
        lay = bn.layout_three()
        assert bn.locate_bin(0.75, lay) == (2, -0.25)
        assert bn.locate_bin(0.1, lay) == (1, 0.1)
        assert bn.locate_bin(-1.0, lay) == (0, 0.0)
        assert bn.locate_bin(1.0, lay) == (2, 0.0)

    def test_boundaries(self):
        lay = bn.layout_three()
        # negative edges close on the left of their right-hand bin, positive
        # edges on the right of their left-hand bin, mirroring the layout
        assert bn.locate_bin(-0.5, lay)[0] == 1
        assert bn.locate_bin(0.5, lay)[0] == 1

    def test_outside(self):
        with pytest.raises(DomainError):
            bn.locate_bin(1.0000000000000002, bn.layout_three())
        with pytest.raises(DomainError):
            bn.locate_bin(float("nan"), bn.layout_three())

    @given(unit)
    def test_sterbenz_exact(self, t):
        for lay in (bn.layout_three(), bn.layout_dyadic(10), bn.layout_dyadic(20)):
            l, u = bn.locate_bin(t, lay)
            assert Fraction(u) == Fraction(t) - Fraction(float(lay.bases[l]))
            assert lay.edges[l] <= t <= lay.edges[l + 1]

    def test_bulk_exactness_dyadic(self):
        lay = bn.layout_dyadic(10)
        t = np.random.default_rng(11).uniform(-1, 1, 100_000)
        t[:1000] = np.random.default_rng(12).uniform(-2.0**-9, 2.0**-9, 1000)
        l, u = bn.locate_bin(t, lay)
        ref = DDArray(t) - DDArray(lay.bases[l])
        assert np.array_equal(ref.hi, u) and not ref.lo.any()


class TestNodes:
    def test_n2(self):
        g = bn.gen_binned_nodes(2, bn.layout_three())
        assert g.bin_of.tolist() == [0, 1, 2]
        assert g.u.tolist() == [0.0, 0.0, 0.0]

    def test_n4(self):
        g = bn.gen_binned_nodes(4, bn.layout_three())
        assert g.bin_of[:2].tolist() == [0, 0]
        assert g.u[0] == 0.0
        assert g.u[1] == pytest.approx(1 - math.sqrt(2) / 2, rel=2.0**-52)
        assert g.u[3] == -g.u[1]

    def test_signed_offsets(self):
        g = bn.gen_binned_nodes(100, bn.layout_three())
        assert np.all(g.u[g.bin_of == 2] <= 0.0)
        assert np.all(g.u[g.bin_of == 0] >= 0.0)

    @pytest.mark.parametrize("layout", ["3", "dyadic:10"])
    def test_reconstruction(self, layout):
        n = 4096
        lay = bn.parse_layout(layout)
        g = bn.gen_binned_nodes(n, lay)
        x = cc.gen_nodes_ext(n)
        xt = g.node_pairs()
        err = np.abs((xt - x).to_double())
        assert np.all(err <= 2.0**-52 * np.abs(g.u))
        assert bn.verify_layout(lay, g).passed

    @pytest.mark.parametrize("layout", ["3", "dyadic:10"])
    def test_offsets_against_mpmath(self, layout):
        n = 999
        g = bn.gen_binned_nodes(n, bn.parse_layout(layout))
        for k in range(n + 1):
            base = float(g.layout.bases[g.bin_of[k]])
            ref = exact_node(n, k) - base
            if abs(ref) < 1e-40:  # node on a base, e.g. -cos(pi/3) = -1/2
                assert g.u[k] == 0.0
            else:
                assert abs((mpmath.mpf(g.u[k]) - ref) / ref) <= 2.0**-53

    def test_layouts_agree_to_one_rounding(self):
        a = bn.gen_binned_nodes(500, bn.layout_three()).node_pairs()
        b = bn.gen_binned_nodes(500, bn.layout_dyadic(10)).node_pairs()
        assert np.all(np.abs((a - b).to_double()) <= 2.0**-52 * np.abs(a.to_double()) + 1e-300)

    def test_working_mode(self):
        g = bn.gen_binned_nodes(300, bn.layout_three(), mode="working")
        x = cc.gen_nodes_ext(300)
        err = np.abs((g.node_pairs() - x).to_double())
        assert np.all(err <= 2.0**-50 * np.abs(g.u))
        with pytest.raises(UsageError):
            bn.gen_binned_nodes(3, bn.layout_three(), mode="quad")

    def test_bad_degree(self):
        with pytest.raises(DomainError):
            bn.gen_binned_nodes(0, bn.layout_three())

    def test_slices_cover(self):
        g = bn.gen_binned_nodes(1000, bn.layout_dyadic(10))
        runs = g.slices()
        assert runs[0][1].start == 0 and runs[-1][1].stop == g.size
        for (m, sl) in runs:
            assert np.all(g.bin_of[sl] == m)


class TestDiff:
    def test_example(self):
        lay = bn.adhoc_layout([-1.0, -0.5, 0.5, 1.0], [-1.0, 0.0, 1.0])
        g = bn.BinnedGrid(1, lay, np.array([0, 2]), np.array([0.1, 0.0]))
        assert bn.binned_diff(2, -0.25, g, 0) == 1.65

    def test_same_bin_one_rounding(self):
        g = bn.gen_binned_nodes(50, bn.layout_three())
        l, u = bn.locate_bin(0.1234, g.layout)
        k = int(np.flatnonzero(g.bin_of == 1)[3])
        assert bn.binned_diff(l, u, g, k) == u - g.u[k]

    @pytest.mark.parametrize("set_name", ["Tm1", "T0"])
    def test_accuracy_on_test_sets(self, set_name):
        n = 9999
        g = bn.gen_binned_nodes(n, bn.layout_three())
        t = harness.test_set_by_name(set_name, n, 10).points
        l, ut = bn.locate_bin(t, g.layout)
        diffs = bn._binned_diffs(g, l, ut)
        xt = g.node_pairs()
        worst = 0.0
        for k in range(0, n + 1, 7):
            ref = DDArray(t) - xt[k]
            hit = ref.hi == 0.0
            assert np.all(diffs[k][hit] == 0.0)
            keep = ~hit
            rel = abs((DDArray(diffs[k][keep]) - ref[keep]) / ref[keep]).to_double()
            worst = max(worst, float(np.max(rel)))
        assert worst <= 1e-15

    def test_error_bound_everywhere(self):
        # across a bin edge the base difference cancels against u_t - u_k
        n = 9999
        g = bn.gen_binned_nodes(n, bn.layout_three())
        x = g.rounded_nodes()
        ks = np.arange(0, n, 97)
        t = np.concatenate([np.nextafter(x[ks], np.inf), np.nextafter(x[ks + 1], -np.inf),
                            0.5 * (x[ks] + x[ks + 1])])
        l, ut = bn.locate_bin(t, g.layout)
        diffs = bn._binned_diffs(g, l, ut)
        xt = g.node_pairs()
        for k in range(0, n + 1, 41):
            ref = (DDArray(t) - xt[k]).to_double()
            err = np.abs((DDArray(diffs[k]) - (DDArray(t) - xt[k])).to_double())
            bound = 2.0**-51 * (np.abs(ref) + np.abs(ut) + abs(g.u[k]))
            assert np.all(err <= bound)


class TestEvaluation:
    def test_square(self):
        g = bn.gen_binned_nodes(2, bn.layout_three())
        y = np.array([1.0, 0.0, 1.0])
        w = cc.WeightVector(np.array([0.125, -0.25, 0.125]), cc.NORMALIZED_LAMBDA, "t")
        assert bn.eval_binned("first", 0.5, g, y, w) == 0.25
        assert bn.eval_binned("second", 0.5, g, y, cc.salzer_weights(2)) == 0.25

    def test_exact_hit(self):
        g = bn.gen_binned_nodes(40, bn.layout_three())
        y = np.arange(41.0)
        t = g.rounded_nodes()
        gap = DDArray(t) - g.node_pairs()
        exact = (gap.hi == 0) & (gap.lo == 0)
        assert exact.sum() >= 3
        out = bn.eval_binned("second", t[exact], g, y, cc.salzer_weights(40))
        assert np.array_equal(out, y[exact])

    def test_errors(self):
        g = bn.gen_binned_nodes(4, bn.layout_three())
        with pytest.raises(UsageError):
            bn.eval_binned("third", 0.1, g, np.ones(5), cc.salzer_weights(4))
        with pytest.raises(UsageError):
            bn.eval_binned("first", 0.1, g, np.ones(5), cc.salzer_weights(4))

    def test_agrees_with_plain_second(self):
        n = 700
        g = bn.gen_binned_nodes(n, bn.layout_three())
        plain = cc.gen_nodes_usual(n)
        y = np.cos(3 * plain.nodes)
        w = cc.salzer_weights(n)
        x = plain.nodes
        t = 0.5 * (x[:-1] + x[1:])  # more than a spacing from every other node
        a = bn.eval_binned("second", t, g, y, w)
        b = cc.second_formula_eval(t, plain, y, w)
        assert np.max(np.abs(a - b)) <= 1e-14

    @pytest.mark.parametrize("formula", ["first", "second"])
    def test_pair_kernel_matches(self, formula):
        n = 200
        g = bn.gen_binned_nodes(n, bn.layout_dyadic(10))
        x = g.node_pairs()
        y = DDArray(np.cos(x.to_double()))
        w = cc.normalized_lambda(x).ext
        t = np.concatenate([np.random.default_rng(3).uniform(-1, 1, 50), [5e-324, -1e-310]])
        a = bn.binned_formula_ext(formula, t, g, y, w)
        b = (cc.first_formula_ext if formula == "first" else cc.second_formula_ext)(
            cc.PairDiffs(DDArray(t), x), y, w)
        assert np.max(np.abs((a - b).to_double())) <= 1e-28

    def test_tiny_point(self):
        n = 1000
        g = bn.gen_binned_nodes(n, bn.layout_three())
        y = np.cos(g.rounded_nodes())
        w = cc.exact_chebyshev_weights(n)
        for t in (5e-324, -1e-310):
            v = bn.eval_binned("first", t, g, y, w)
            assert abs(v - bn.eval_binned("first", math.copysign(1e-100, t), g, y, w)) <= n * 2.0**-53


class TestSerialization:
    @pytest.mark.parametrize("layout", ["3", "dyadic:10"])
    def test_round_trip(self, layout):
        g = bn.gen_binned_nodes(257, bn.parse_layout(layout))
        h = bn.loads(bn.dumps(g))
        assert h.n == g.n and h.layout.name == g.layout.name
        assert np.array_equal(h.u, g.u) and np.array_equal(h.bin_of, g.bin_of)
        assert np.array_equal(h.layout.edges, g.layout.edges)
        assert np.array_equal(h.layout.bases, g.layout.bases)

    def test_rejects_garbage(self):
        with pytest.raises(UsageError):
            bn.loads("hello\n")
        with pytest.raises(UsageError):
            bn.loads("barycheb-binned-grid 99\nn 1\n")
