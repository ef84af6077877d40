import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roumieu_kit import (SCHEDULES, DerivativeBoundProfile, N_from_r, RSequence, WeightMatrix,
                         WeightFunctionOmega, WeightSequence, corpus, equivalence_report,
                         matrix_from_omega, projective_membership, roumieu_membership,
                         seminorm_Mh, seminorm_N1, seminorm_omega_rho, seminorm_r, vset_sample,
                         young_conjugate)
from roumieu_kit.errors import ExtendGrid, InvalidArgument
from roumieu_kit.seminorms import corpus_profile, default_samples, sweep_matrices

fact = WeightSequence.gevrey(1.0)
g2 = WeightSequence.gevrey(2.0)
inv = corpus_profile("inverse_linear")
prof_g2 = corpus_profile("gevrey2")
prof_g22 = corpus_profile("gevrey2.2")
spf = corpus_profile("selfpower_factorial")


class TestCorpus:
    def test_size_and_names(self):
        names = [p.name for p in corpus()]
        assert len(names) >= 6 and len(set(names)) == len(names)

    def test_function_backed_exact_derivatives(self):
        # sup over [-1/2, 1/2] of |d^p/dx^p 1/(1-x)| = p!/(1-x)^(p+1) at x = 1/2
        for p in range(12):
            assert math.exp(inv.sequence.log(p)) == pytest.approx(
                math.factorial(p) * 2 ** (p + 1))
        sine = corpus_profile("sine")
        assert sine.provenance["kind"] == "function-backed"
        np.testing.assert_allclose(sine.logs(50), 0.0)

    def test_unknown_profile(self):
        with pytest.raises(InvalidArgument):
            corpus_profile("nope")


class TestSeminorms:
    def test_inverse_linear_quarter(self):
        s = seminorm_Mh(inv, fact, 0.25, 200)
        assert s.value == pytest.approx(2) and s.argmax == 0 and s.finite

    def test_self_ratio(self):
        for P in (10, 50, 200):
            s = seminorm_Mh(g2, g2, 1.0, P)
            assert s.value == 1.0

    def test_divergent_boundary(self):
        prev = -math.inf
        for P in (50, 100, 200):
            s = seminorm_Mh(prof_g22, g2, 1.0, P)
            assert s.boundary and s.log_value > prev
            prev = s.log_value

    def test_rejects_bad_h(self):
        with pytest.raises(InvalidArgument):
            seminorm_Mh(inv, fact, 0.0, 10)

    def test_N1_against_product(self):
        N = N_from_r(fact, RSequence.power(1.0), 200)
        s = seminorm_N1(inv, N, 200)
        assert s.finite and s.argmax <= 2

    def test_N1_sqrt_sample_divergent(self):
        N = vset_sample(WeightMatrix.constant(fact), SCHEDULES["sqrt"], 200, check=False)
        assert seminorm_N1(spf, N, 200).boundary

    def test_omega_row_profile(self):
        om = WeightFunctionOmega.power(0.5)
        conj = young_conjugate(om, 400.0, 801)
        rho = 2.0
        a = WeightSequence.from_logs(conj.evaluate(rho * np.arange(201)) / rho)
        s = seminorm_omega_rho(a, conj, rho, 200)
        assert s.log_value == pytest.approx(0.0, abs=1e-12)

    def test_omega_gevrey2_finite(self):
        conj = young_conjugate(WeightFunctionOmega.power(0.5), 1600.0, 1601)
        s = seminorm_omega_rho(prof_g2, conj, 1.0, 200)
        assert s.finite

    def test_omega_mismatch_divergent(self):
        conj = young_conjugate(WeightFunctionOmega.power(0.5), 1600.0, 1601)
        g3 = WeightSequence.gevrey(3.0)
        for rho in (1.0, 2.0, 4.0):
            assert seminorm_omega_rho(g3, conj, rho, 200).boundary

    def test_omega_grid_short(self):
        conj = young_conjugate(WeightFunctionOmega.power(0.5), 100.0, 201)
        with pytest.raises(ExtendGrid):
            seminorm_omega_rho(prof_g2, conj, 1.0, 200)

    def test_r_self_profile(self):
        r = RSequence.power(1.0)
        s = seminorm_r(fact, fact, r, 100)
        assert s.value == pytest.approx(1.0) and s.argmax == 0

    def test_r_divergent_slow(self):
        s = seminorm_r(spf, fact, RSequence.power(0.5), 200)
        assert s.boundary

    def test_bridge_linear(self):
        r = RSequence.power(1.0)
        a = seminorm_r(inv, fact, r, 200)
        b = seminorm_N1(inv, N_from_r(fact, r, 200), 200)
        np.testing.assert_array_equal(a.log_ratios, b.log_ratios)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.01, 100), st.floats(0.1, 4.0))
    def test_homogeneity(self, lam, h):
        base = seminorm_Mh(prof_g2, fact, h, 60).log_value
        scaled = seminorm_Mh(prof_g2.scaled(lam), fact, h, 60).log_value
        assert scaled == pytest.approx(base + math.log(lam), abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.1, 2.0), st.floats(0.1, 2.0))
    def test_monotone_in_h(self, h1, h2):
        lo, hi = sorted((h1, h2))
        assert seminorm_Mh(inv, fact, lo, 60).log_value <= seminorm_Mh(inv, fact, hi, 60).log_value

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, 3.0), st.integers(0, 60))
    def test_nonincreasing_in_M(self, bump, j):
        logs = fact.logs(60).copy()
        logs[j] += bump
        bigger = WeightSequence.from_logs(logs)
        for h in (0.5, 1.0):
            assert seminorm_Mh(inv, bigger, h, 60).log_value <= seminorm_Mh(inv, fact, h, 60).log_value


class TestMembership:
    def test_trivial_inductive(self):
        v = roumieu_membership(prof_g2, WeightMatrix.constant(g2), (1.0, 0.5, 0.25), 200)
        assert v.holds and v.witness["n"] == 0 and v.witness["h"] == 1.0
        assert v.witness["bound"] == pytest.approx(1.0)

    def test_inverse_linear_inductive(self):
        v = roumieu_membership(inv, WeightMatrix.constant(fact), (1.0, 0.5, 0.25), 200)
        assert v.holds and v.witness["bound"] == pytest.approx(2.0)

    def test_divergent_inductive(self):
        v = roumieu_membership(prof_g22, WeightMatrix.constant(g2), (1.0, 0.5), 200)
        assert v.inconclusive

    def test_never_hard_fails(self):
        for prof in corpus():
            assert not roumieu_membership(prof, WeightMatrix.constant(fact)).fails

    def test_projective_trivial(self):
        mat = WeightMatrix.constant(g2)
        assert projective_membership(prof_g2, mat, default_samples(mat, 200), 200).holds

    def test_projective_refutation(self):
        mat = WeightMatrix.constant(fact)
        v = projective_membership(spf, mat, default_samples(mat, 200), 200)
        assert v.fails and len(v.counterexample["blocks"]) == mat.nmax + 1

    def test_sample_itself_is_refuted(self):
        # a sample N lies strictly above every row, so N is too large for the class
        mat = WeightMatrix.constant(g2)
        samples = default_samples(mat, 200)
        prof = DerivativeBoundProfile("sample", samples[0])
        assert seminorm_N1(prof, samples[0], 200).value == 1.0
        assert projective_membership(prof, mat, samples, 200).fails

    def test_invalid_samples(self):
        mat = WeightMatrix.constant(fact)
        with pytest.raises(InvalidArgument):
            projective_membership(inv, mat, [fact], 200)


class TestReports:
    def test_designed_positive(self):
        rep = equivalence_report(prof_g2, WeightMatrix.constant(g2))
        assert rep.pair == ("holds", "holds") and rep.consistent

    def test_designed_negative(self):
        rep = equivalence_report(prof_g22, WeightMatrix.constant(g2, nmax=2))
        assert rep.pair == ("inconclusive", "fails") and rep.consistent
        assert rep.witness is not None

    def test_row_profile(self):
        mat = matrix_from_omega(WeightFunctionOmega.power(0.5), 8, 200)
        prof = DerivativeBoundProfile("row", mat.row(3))
        assert equivalence_report(prof, mat).pair == ("holds", "holds")

    def test_sweep_consistent(self):
        for name, mat in sweep_matrices().items():
            samples = default_samples(mat, 200)
            for prof in corpus():
                assert equivalence_report(prof, mat, samples=samples).consistent

    def test_depth_monotone_evidence(self):
        # (p!)^0.2 / 2^p dips until p ~ 32 and only climbs back above 1 near p ~ 80
        found = [seminorm_Mh(prof_g22, g2, 0.5, P).boundary for P in (60, 120, 200)]
        assert found == [False, True, True]

    def test_report_dict(self):
        d = equivalence_report(prof_g2, WeightMatrix.constant(g2)).to_dict()
        assert d["consistent"] and d["inductive"]["status"] == "holds"
