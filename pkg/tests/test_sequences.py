import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from oracles import brute_associated, chord_minorant
from roumieu_kit import (WeightSequence, associated_function, associated_function_grid,
                         check_condition, log_convex_minorant, relation, scale_geometric)
from roumieu_kit.errors import DepthExceeded, InvalidArgument, InvalidSequence
from roumieu_kit.sequences import lower_convex_hull, m1_violations

fact = WeightSequence.gevrey(1.0)
logs_pos = st.lists(st.floats(-20, 20, allow_nan=False), min_size=1, max_size=8)


class TestConstruction:
    def test_tabulated_rejects_nonpositive(self):
        with pytest.raises(InvalidSequence, match="p=1"):
            WeightSequence.tabulated([1.0, 0.0, 2.0])

    def test_empty_rejected(self):
        with pytest.raises(InvalidSequence):
            WeightSequence.tabulated([])

    def test_depth_exceeded(self):
        with pytest.raises(DepthExceeded):
            WeightSequence.tabulated([1, 2, 3]).logs(5)

    def test_gevrey_values(self):
        s = WeightSequence.gevrey(2.0, h=3.0, c=0.5)
        p = np.arange(30)
        np.testing.assert_allclose(s.logs(29), math.log(0.5) + p * math.log(3) + 2 * gammaln(p + 1))

    def test_selfpower_zero_power(self):
        s = WeightSequence.selfpower(a=1.0, s=1.0)
        assert s.log(0) == 0.0
        assert s.log(3) == pytest.approx(3 * math.log(3) + math.log(6))

    def test_logs_read_only(self):
        with pytest.raises(ValueError):
            fact.logs(5)[0] = 1.0

    def test_deep_prefix_no_overflow(self):
        assert np.all(np.isfinite(WeightSequence.gevrey(3.0).logs(2000)))


class TestConditions:
    def test_factorial_m1(self):
        v = check_condition(fact, "M1", 50)
        assert v.holds
        # exact re-evaluation of every checked index
        L = fact.logs(50)
        assert all(2 * L[p] <= L[p - 1] + L[p + 1] for p in range(1, 50))

    def test_factorial_m2prime_constants(self):
        v = check_condition(fact, "M2prime", 50)
        assert v.holds and v.witness["C"] == 1.0 and v.witness["H"] == 2.0
        assert all(p + 1 <= 2 ** p for p in range(51))

    def test_dented_fails_at_2(self):
        v = check_condition(WeightSequence.tabulated([1, 1, 4, 9]), "M1", 3)
        assert v.fails and v.counterexample["p"] == 2
        assert v.counterexample["M_p^2"] == pytest.approx(16)
        assert v.counterexample["M_(p-1)M_(p+1)"] == pytest.approx(9)

    def test_depth_below_two(self):
        with pytest.raises(InvalidArgument):
            check_condition(fact, "M1", 1)

    def test_unknown_condition(self):
        with pytest.raises(InvalidArgument):
            check_condition(fact, "M7", 10)

    def test_condition_aliases(self):
        assert check_condition(fact, "M2'", 20).holds
        assert check_condition(fact, "M.1", 20).holds

    def test_m0_tabulated_witness_checks(self):
        seq = WeightSequence.tabulated([2.0 * 1.5 ** p for p in range(40)])
        v = check_condition(seq, "M0", 39)
        assert v.holds
        c, h = v.witness["c"], v.witness["h"]
        assert all(seq.values(39)[p] >= c * h ** p * (1 - 1e-12) for p in range(40))

    def test_m0_decaying_roots_inconclusive(self):
        seq = WeightSequence.tabulated([1 / math.factorial(p) for p in range(40)])
        assert check_condition(seq, "M0", 39).inconclusive

    def test_m2prime_superexp_inconclusive(self):
        assert check_condition(WeightSequence.superexp(1.0), "M2prime", 60).inconclusive

    def test_m2prime_tabulated_bound_verifiable(self):
        seq = WeightSequence.tabulated([math.factorial(p) * 3.0 ** p for p in range(31)])
        v = check_condition(seq, "M2prime", 29)
        assert v.holds
        L = seq.logs(30)
        C, H = v.witness["C"], v.witness["H"]
        assert all(L[p + 1] <= math.log(C) + p * math.log(H) + L[p] + 1e-9 for p in range(30))


class TestMinorant:
    def test_three_point_example(self):
        mc = log_convex_minorant(WeightSequence.tabulated([1, 4, 2]))
        np.testing.assert_allclose(mc.values(2), [1, math.sqrt(2), 2])

    def test_factorial_unchanged(self):
        s = WeightSequence.tabulated([math.factorial(p) for p in range(21)])
        np.testing.assert_allclose(log_convex_minorant(s).logs(20), s.logs(20), atol=1e-12)

    def test_constant_unchanged(self):
        np.testing.assert_array_equal(
            log_convex_minorant(WeightSequence.tabulated([1, 1, 1, 1])).values(3), 1)

    def test_parametric_needs_depth(self):
        with pytest.raises(InvalidArgument):
            log_convex_minorant(fact)

    @settings(max_examples=200, deadline=None)
    @given(logs_pos)
    def test_against_chord_oracle(self, y):
        mc = log_convex_minorant(WeightSequence.from_logs(y))
        np.testing.assert_allclose(mc.logs(len(y) - 1), chord_minorant(y), atol=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(logs_pos)
    def test_minorant_properties(self, y):
        s = WeightSequence.from_logs(y)
        mc = log_convex_minorant(s)
        P = len(y) - 1
        L = mc.logs(P)
        assert np.all(L <= np.asarray(y) + 1e-12)
        assert m1_violations(L).size == 0
        assert L[0] == y[0] and L[-1] == y[-1]
        np.testing.assert_allclose(log_convex_minorant(mc).logs(P), L, atol=1e-12)

    def test_hull_endpoints(self):
        x = np.arange(5.0)
        idx = lower_convex_hull(x, np.array([0.0, 5.0, 1.0, 5.0, 0.0]))
        assert idx[0] == 0 and idx[-1] == 4


class TestRelations:
    def test_prec_factorial_square(self):
        v = relation(fact, WeightSequence.tabulated(
            [math.factorial(p) ** 2 for p in range(51)]), "prec", 50)
        assert v.holds
        q = (1 / np.array([math.factorial(p) for p in range(1, 51)], dtype=float)
             ) ** (1 / np.arange(1, 51))
        assert q[-1] < 0.1

    def test_subset_geometric_shift(self):
        N = WeightSequence.gevrey(1.0, h=2.0)
        v = relation(fact, N, "subset", 50)
        assert v.holds and v.witness["C"] == pytest.approx(1) and v.witness["h"] == pytest.approx(0.5)

    def test_prec_geometric_shift_fails(self):
        v = relation(fact, WeightSequence.gevrey(1.0, h=2.0), "prec", 50)
        assert v.fails
        h = v.counterexample["h"]
        # with this h the quotient M_p / (h^p N_p) = (1/(2h))^p is unbounded
        assert h < 0.5

    def test_tabulated_shift_subset(self):
        M = WeightSequence.tabulated([math.factorial(p) for p in range(51)])
        N = WeightSequence.tabulated([2 ** p * math.factorial(p) for p in range(51)])
        v = relation(M, N, "subset", 50)
        assert v.holds and v.witness["h"] == pytest.approx(0.5) and v.witness["C"] == pytest.approx(1)
        # tabulated data carries no certified reason for a hard failure
        assert relation(M, N, "prec", 50).inconclusive

    def test_identity_subset(self):
        s = WeightSequence.tabulated([1, 3, 2, 7, 30])
        v = relation(s, s, "subset", 4)
        assert v.holds and v.witness["C"] == 1 and v.witness["h"] == 1

    def test_growing_quotient_inconclusive(self):
        v = relation(WeightSequence.gevrey(2.0), fact, "subset", 50)
        assert not v.holds

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(0.5, 3), st.floats(0.5, 3))
    def test_prec_implies_subset(self, s1, s2, h1, h2):
        M = WeightSequence.gevrey(s1, h=h1)
        N = WeightSequence.gevrey(s2, h=h2)
        if relation(M, N, "prec", 40).holds:
            assert relation(M, N, "subset", 40).holds

    def test_prec_implies_subset_tabulated(self):
        M = WeightSequence.tabulated([math.factorial(p) for p in range(61)])
        N = WeightSequence.tabulated([math.factorial(p) ** 3 for p in range(61)])
        assert relation(M, N, "prec", 60).holds
        assert relation(M, N, "subset", 60).holds


class TestAssociated:
    def test_t_one(self):
        v = associated_function(fact, 1.0, 50)
        assert v.value == 0 and v.argmax == 0

    def test_t_two(self):
        v = associated_function(fact, 2.0, 50)
        assert v.value == pytest.approx(math.log(2))
        assert v.argmax in (1, 2) and not v.boundary

    def test_constant_boundary(self):
        v = associated_function(WeightSequence.tabulated([1.0] * 51), 2.0, 50)
        assert v.value == pytest.approx(50 * math.log(2)) and v.boundary

    def test_negative_t(self):
        with pytest.raises(InvalidArgument):
            associated_function(fact, -1.0, 10)

    def test_matches_brute_force(self):
        L = WeightSequence.gevrey(1.5, h=0.7).logs(40)
        s = WeightSequence.from_logs(L)
        for t in (0.5, 1.0, 3.0, 17.0, 400.0):
            assert associated_function(s, t, 40).value == pytest.approx(brute_associated(L, t))

    def test_monotone_in_t_and_depth(self):
        t = np.geomspace(0.1, 1e4, 200)
        v20, _ = associated_function_grid(fact, t, 20)
        v40, _ = associated_function_grid(fact, t, 40)
        assert np.all(np.diff(v20) >= -1e-12)
        assert np.all(v40 >= v20 - 1e-12)

    def test_round_trip_recovers_factorial(self):
        t = np.geomspace(1e-2, 1e6, 10_000)
        w, _ = associated_function_grid(fact, t, 200)
        for p in range(11):
            rec = np.max(p * np.log(t) - w)
            assert math.exp(fact.log(p) - rec) <= 1.05 and rec <= fact.log(p) + 1e-12


class TestScale:
    def test_half(self):
        np.testing.assert_allclose(scale_geometric(fact, 0.5).logs(30),
                                   gammaln(np.arange(31) + 1) - np.arange(31) * math.log(2))

    def test_identity(self):
        s = WeightSequence.tabulated([1, 5, 2])
        np.testing.assert_allclose(scale_geometric(s, 1.0).logs(2), s.logs(2))

    def test_cancellation(self):
        s = WeightSequence.tabulated([2.0 ** p for p in range(10)])
        np.testing.assert_allclose(scale_geometric(s, 0.5).values(9), 1.0, atol=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidArgument):
            scale_geometric(fact, 0.0)

    @given(st.floats(0.01, 100))
    def test_round_trip(self, rho):
        s = WeightSequence.tabulated([math.factorial(p) for p in range(25)])
        back = scale_geometric(scale_geometric(s, rho), 1 / rho)
        np.testing.assert_allclose(back.logs(24), s.logs(24), atol=1e-12)
