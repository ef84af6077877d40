import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roumieu_kit import (SCHEDULES, WeightMatrix, WeightSequence, check_condition,
                         check_matrix_M2prime, log_convex_minorant, vset_membership,
                         vset_sample, vset_star_membership, witness_diagonal, witness_sup)
from roumieu_kit.errors import BlockNotFound, BoundaryAttained, InvalidArgument

fact = WeightSequence.gevrey(1.0)
const_fact = WeightMatrix.constant(fact)
lf = [math.lgamma(p + 1) for p in range(402)]


def tab(fn, P=200):
    return WeightSequence.from_logs([fn(p) for p in range(P + 1)])


class TestMatrix:
    def test_constant_distinct_rows(self):
        assert len(const_fact.distinct_rows()) == 1

    def test_explicit_nmax(self):
        m = WeightMatrix.explicit([fact, WeightSequence.gevrey(1.0, h=2.0)])
        assert m.nmax == 1
        with pytest.raises(InvalidArgument):
            m.row(2)

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgument):
            WeightMatrix.explicit([])

    def test_scaled_rows_monotone(self):
        m = WeightMatrix.scaled(fact, nmax=5)
        assert m.check_rows_monotone(60).holds
        assert m.row(3).log(10) == pytest.approx(10 * math.log(4) + lf[10])

    def test_monotone_violation(self):
        m = WeightMatrix.explicit([WeightSequence.gevrey(1.0, h=2.0), fact])
        v = m.check_rows_monotone(20)
        assert v.fails and v.counterexample["n"] == 0


class TestM2prime:
    def test_constant_factorial(self):
        v = check_matrix_M2prime(const_fact, 50)
        assert v.holds
        c = v.witness["constants"][0]
        assert c["m"] == 0 and c["C"] == 1 and c["H"] == 2

    def test_scaled_rows(self):
        m = WeightMatrix.scaled(fact, nmax=4)
        v = check_matrix_M2prime(m, 60)
        assert v.holds
        for n, c in v.witness["constants"].items():
            Mn, Mm = m.row(n).logs(61), m.row(c["m"]).logs(60)
            p = np.arange(61)
            assert np.all(Mn[1:] <= math.log(c["C"]) + p * math.log(c["H"]) + Mm + 1e-9)

    def test_superexp_inconclusive(self):
        m = WeightMatrix.explicit([WeightSequence.superexp(1.0)])
        assert check_matrix_M2prime(m, 60).inconclusive


class TestVset:
    def test_factorial_times_next_factorial(self):
        N = tab(lambda p: lf[p] + lf[p + 1])
        assert vset_membership(N, const_fact, 200).holds

    def test_geometric_shift_fails(self):
        assert vset_membership(WeightSequence.gevrey(1.0, h=2.0), const_fact, 50).fails

    def test_row_itself_fails(self):
        assert vset_membership(fact, const_fact, 50).fails

    def test_star_holds(self):
        N = tab(lambda p: lf[p] + lf[p + 1])
        assert vset_star_membership(N, const_fact, 200).holds

    def test_star_dent_fails_at_index(self):
        logs = [lf[p] + lf[p + 1] for p in range(201)]
        logs[100] += 5.0
        v = vset_star_membership(WeightSequence.from_logs(logs), const_fact, 200)
        assert v.fails and v.counterexample["p"] == 100

    def test_star_minorant(self):
        logs = [lf[p] + lf[p + 1] + (3.0 if p % 7 == 3 else 0.0) for p in range(201)]
        mc = log_convex_minorant(WeightSequence.from_logs(logs))
        assert check_condition(mc, "M1", 200).holds


class TestWitnessDiagonal:
    a = tab(lambda p: (p * math.log(p) if p else 0.0) + lf[p])

    def test_blocks_and_ratios(self):
        w = witness_diagonal(self.a, const_fact, 200, thresholds=(1e6,))
        starts = [s for s, _ in w.blocks]
        assert starts[0] == 0 and all(x < y for x, y in zip(starts, starts[1:]))
        assert len(w.blocks) >= 5
        la, lN = self.a.logs(200), w.sequence.logs(200)
        for s, n in w.blocks[1:]:
            assert la[s] - lN[s] >= math.log(n)
        assert w.crossings[1e6] is not None

    def test_block_form(self):
        w = witness_diagonal(self.a, const_fact, 200)
        bounds = [s for s, _ in w.blocks[1:]] + [201]
        lN = w.sequence.logs(200)
        for (lo, n), hi in zip(w.blocks, bounds):
            p = np.arange(lo, hi)
            np.testing.assert_allclose(lN[lo:hi], p * math.log(max(n, 1)) + fact.logs(200)[lo:hi])

    def test_witness_in_vset(self):
        # the last block has root quotient 1/nmax, so nmax must beat 1/tau
        mat = WeightMatrix.constant(fact, nmax=16)
        w = witness_diagonal(self.a, mat, 200)
        assert vset_membership(w.sequence, mat, 200).holds

    def test_witness_tail_is_one_over_nmax(self):
        w = witness_diagonal(self.a, const_fact, 200)
        v = vset_membership(w.sequence, const_fact, 200)
        assert v.inconclusive and "0.125" in v.trace

    def test_least_index_rule(self):
        w = witness_diagonal(self.a, const_fact, 200)
        la = self.a.logs(200)
        prev = 0
        for s, n in w.blocks[1:]:
            for q in range(prev + 1, s):
                assert la[q] - q * math.log(n) - fact.log(q) < math.log(n)
            prev = s

    def test_row_profile_block_not_found(self):
        with pytest.raises(BlockNotFound) as err:
            witness_diagonal(fact, const_fact, 200)
        assert err.value.n == 2


class TestWitnessSup:
    def test_product_bound(self):
        a = tab(lambda p: -2 * lf[p])
        w = witness_sup(a, const_fact, 8, 200)
        assert np.all(a.logs(200) + w.sequence.logs(200) <= 0.0)
        assert all(math.isfinite(c) for c in w.log_constants.values())

    def test_boundary(self):
        with pytest.raises(BoundaryAttained) as err:
            witness_sup(tab(lambda p: -lf[p]), const_fact, 8, 200)
        assert err.value.n == 2

    def test_homogeneity(self):
        a = tab(lambda p: -2 * lf[p])
        b = tab(lambda p: math.log(0.5) - 2 * lf[p])
        wa, wb = witness_sup(a, const_fact, 8, 200), witness_sup(b, const_fact, 8, 200)
        for n in wa.log_constants:
            assert wb.log_constants[n] == pytest.approx(wa.log_constants[n] + math.log(0.5))
        np.testing.assert_allclose(wb.sequence.logs(200), wa.sequence.logs(200) - math.log(0.5),
                                   atol=1e-9)
        assert np.all(b.logs(200) + wb.sequence.logs(200) <= 0.0)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(2.0, 4.0), st.floats(-5, 5))
    def test_product_bound_property(self, s, c):
        a = WeightSequence.gevrey(-s, c=math.exp(c))
        w = witness_sup(a, const_fact, 6, 120)
        assert np.all(a.logs(120) + w.sequence.logs(120) <= 0.0)


class TestSample:
    def test_sqrt_schedule(self):
        N = vset_sample(const_fact, SCHEDULES["sqrt"], 1000)
        p = np.arange(1, 1001)
        q = np.exp((fact.logs(1000)[1:] - N.logs(1000)[1:]) / p)
        np.testing.assert_allclose(q, 1 / (np.array([math.isqrt(k) for k in p]) + 1))

    def test_sqrt_too_slow_at_200(self):
        with pytest.raises(InvalidArgument):
            vset_sample(const_fact, SCHEDULES["sqrt"], 200)

    def test_bounded_rejected(self):
        with pytest.raises(InvalidArgument):
            vset_sample(const_fact, [1] * 201, 200)

    def test_decreasing_rejected(self):
        with pytest.raises(InvalidArgument):
            vset_sample(const_fact, list(range(201, 0, -1)), 200)

    def test_linear(self):
        N = vset_sample(const_fact, SCHEDULES["linear"], 200)
        p = np.arange(201)
        np.testing.assert_allclose(N.logs(200), p * np.log(p + 1) + fact.logs(200))
        assert vset_membership(N, const_fact, 200).holds

    def test_explicit_matrix_limit(self):
        m = WeightMatrix.explicit([fact, WeightSequence.gevrey(1.0, h=2.0)])
        with pytest.raises(InvalidArgument):
            vset_sample(m, SCHEDULES["linear"], 50)
