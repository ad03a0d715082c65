"""Entanglement witness: bounds, closed forms, optimization, bath corrections."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinlev import witness
from spinlev.witness import (
    DegenerateMomentsError,
    WitnessCoefficients,
    bath_deltas,
    bath_witness,
    halfperiod_coefficients,
    make_result,
    noiseless_moments,
    optimize_coefficients,
    pulsed_effective_lambda,
    separable_bound,
    t_fixed_pulseless,
    thermal_wb,
    thermal_wen,
    violation_scan,
    witness_value,
)


class TestSeparableBound:
    def test_zero_coefficients(self):
        assert separable_bound(WitnessCoefficients(0, 0, 0, 0)) == 0.5

    def test_unit_cross_terms(self):
        assert separable_bound(WitnessCoefficients(a_y=0, b_y=1, a_z=1, b_z=0)) == 1.5

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            WitnessCoefficients(math.nan, 0, 0, 0)


class TestClosedForms:
    def test_limits_at_zero_lambda(self):
        assert thermal_wb(0.0, 1.3, 1.0, 0.0, 2.0) == 0.5
        assert thermal_wen(0.0, 1.3, 1.0, 2.0) == 0.5
        c = halfperiod_coefficients(0.0, 2.0)
        assert (c.a_y, c.b_y, c.a_z, c.b_z) == (0, 0, 0, 0)

    def test_halfperiod_values(self):
        c = halfperiod_coefficients(1.0, 0.0)
        assert c.a_y == 0.0 and c.b_z == 0.0
        assert c.b_y == pytest.approx(math.sqrt(2) * math.exp(-2.0), rel=1e-14)
        assert c.a_z == pytest.approx(math.sqrt(2) / 5.0, rel=1e-14)

    def test_identity_bound_equals_thermal_wb(self):
        omega = 1.0
        for lam in np.linspace(0, 2, 21):
            for nbar in np.linspace(0, 10, 11):
                lhs = separable_bound(halfperiod_coefficients(lam, nbar))
                rhs = thermal_wb(lam, nbar, omega, 0.0, math.pi / omega)
                assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_violation_positive_for_ground_state(self):
        omega = 1.0
        t = math.pi / omega
        for lam in np.linspace(0.05, 1.0, 12):
            wb = thermal_wb(lam, 0.0, omega, 0.0, t)
            wen = thermal_wen(lam, 0.0, omega, t)
            assert wb - wen > 0

    def test_small_lambda_expansion(self):
        # W_en ~ 1/2 - lambda^2 + O(lambda^4) at nbar = 0, t = pi/omega
        lam = 1e-3
        wen = thermal_wen(lam, 0.0, 1.0, math.pi)
        assert wen == pytest.approx(0.5 - lam**2, abs=5e-11)

    @settings(max_examples=40, deadline=None)
    @given(lam=st.floats(0.01, 1.5), n1=st.floats(0.0, 8.0), dn=st.floats(0.1, 3.0))
    def test_ratio_nonincreasing_in_nbar(self, lam, n1, dn):
        omega, t = 1.0, math.pi
        def ratio(nbar):
            wb = thermal_wb(lam, nbar, omega, 0.0, t)
            wen = thermal_wen(lam, nbar, omega, t)
            return (wb - wen) / wb
        assert ratio(n1 + dn) <= ratio(n1) + 1e-12

    def test_pulsed_effective_lambda(self):
        assert pulsed_effective_lambda(0.0, 1.0, 1.0) == 0.0
        assert pulsed_effective_lambda(2.0, 3.0, 0.5) == pytest.approx(
            3.0 * 2.0 * 0.25 / 4.0, rel=1e-15)


class TestWitnessValue:
    def test_product_state_value(self):
        m = noiseless_moments(0.0, 0.0, 1.0, 0.0, 1.0)
        assert witness_value(m, WitnessCoefficients(0, 0, 0, 0)) == pytest.approx(0.5)

    def test_matches_thermal_wen_at_optimum(self):
        omega, t = 1.0, math.pi / 1.0
        for lam, nbar in [(0.3, 0.0), (0.5, 1.0), (1.0, 2.5)]:
            m = noiseless_moments(lam, nbar, omega, 0.0, t)
            c = optimize_coefficients(m)
            assert witness_value(m, c) == pytest.approx(
                thermal_wen(lam, nbar, omega, t), rel=1e-12)

    def test_make_result(self):
        r = make_result(1.0, 0.9)
        assert r.w_ratio == pytest.approx(0.1)
        assert r.n_meas == math.ceil(r.w_ratio**-2)
        assert make_result(1.0, 1.1).n_meas is None


class TestOptimizeCoefficients:
    def test_product_state_zero_coefficients(self):
        m = noiseless_moments(0.0, 0.0, 1.0, 0.0, 0.7)
        c = optimize_coefficients(m)
        assert (c.a_y, c.b_y, c.a_z, c.b_z) == pytest.approx((0, 0, 0, 0), abs=1e-14)

    def test_recovers_halfperiod_coefficients(self):
        omega = 1.0
        for lam, nbar in [(0.4, 0.0), (0.7, 1.5)]:
            m = noiseless_moments(lam, nbar, omega, 0.0, math.pi / omega)
            c = optimize_coefficients(m)
            ref = halfperiod_coefficients(lam, nbar)
            assert c.a_y == pytest.approx(ref.a_y, abs=1e-10)
            assert c.b_y == pytest.approx(ref.b_y, rel=1e-10)
            assert c.a_z == pytest.approx(ref.a_z, rel=1e-10)
            assert c.b_z == pytest.approx(ref.b_z, abs=1e-10)

    def test_beats_grid_search(self):
        rng = np.random.default_rng(7)
        m = noiseless_moments(0.35, 0.2, 1.0, 0.0, 2.1)
        c = optimize_coefficients(m)
        best = witness_value(m, c)
        for _ in range(200):
            trial = WitnessCoefficients(*rng.uniform(-2, 2, size=4))
            assert witness_value(m, trial) >= best - 1e-12

    def test_degenerate_moments_raise(self):
        m = noiseless_moments(0.0, 0.0, 1.0, 0.0, 2 * math.pi)
        degenerate = witness.MomentRecord(
            **{f: getattr(m, f) for f in m.__dataclass_fields__})
        object.__setattr__(degenerate, "var_q", 0.0)
        object.__setattr__(degenerate, "var_p", 0.0)
        object.__setattr__(degenerate, "cov_qp", 0.0)
        with pytest.raises(DegenerateMomentsError):
            optimize_coefficients(degenerate)


class TestBathDeltas:
    def test_zero_bath(self):
        d = bath_deltas(0.5, 0.0, 1.0, 2.0)
        assert all(v == 0.0 for v in
                   (d.dvar_sx, d.dq2, d.dp2, d.dqp, d.dsyq, d.dsyp))

    def test_full_period_values(self):
        # at omega t = 2 pi the sine terms vanish
        lam, noq, omega = 0.5, 0.3, 1.0
        t = 2 * math.pi / omega
        d = bath_deltas(lam, noq, omega, t)
        assert d.dq2 == pytest.approx(noq * 4 * math.pi, rel=1e-12)
        assert d.dp2 == pytest.approx(noq * 4 * math.pi, rel=1e-12)
        assert d.dqp == pytest.approx(0.0, abs=1e-12)
        assert d.dvar_sx == pytest.approx(0.5 * lam**2 * noq * 12 * math.pi, rel=1e-12)

    def test_linearity_in_bath_strength(self):
        a = bath_deltas(0.5, 1e-3, 1.0, 1.3)
        b = bath_deltas(0.5, 1.0, 1.0, 1.3)
        assert b.dq2 == pytest.approx(1e3 * a.dq2, rel=1e-12)
        assert b.dsyp == pytest.approx(1e3 * a.dsyp, rel=1e-12)


class TestBathWitness:
    def test_reduces_to_noiseless(self):
        omega, lam, t = 1.0, 0.5, math.pi
        r = bath_witness(lam, 0.0, 0.0, omega, 0.0, t, initial="ground")
        assert r.w_b == pytest.approx(thermal_wb(lam, 0.0, omega, 0.0, t), rel=1e-12)
        assert r.w_en == pytest.approx(thermal_wen(lam, 0.0, omega, t), rel=1e-12)

    def test_violation_truncates_with_bath(self):
        # positive violation at small omega t, negative once bath noise dominates
        lam, noq, omega = 0.5, 0.05, 1.0
        early = bath_witness(lam, 0.0, noq, omega, 0.0, 0.3 * math.pi / omega)
        assert early.w_ratio > 0
        ratios = [bath_witness(lam, 0.0, noq, omega, 0.0, t).w_ratio
                  for t in np.linspace(0.1, 40 * math.pi, 300)]
        assert min(ratios) < 0

    def test_regression_point(self):
        r = bath_witness(0.5, 0.0, 1e-3, 1.0, 0.0, math.pi / 4, initial="ground")
        assert 0 < r.w_ratio < 1
        # locked after Monte Carlo cross-check of the assembled moments
        assert r.w_ratio == pytest.approx(0.15851741531444352, rel=1e-12)


class TestViolationScan:
    def test_zero_lambda_no_landmarks(self):
        res = violation_scan("pulsed", "t", list(np.linspace(1e-4, 1e-2, 50)),
                             g=0.0, omega=2 * math.pi * 100)
        assert all(p.w_ratio == 0.0 for p in res.points)
        assert res.tau_asymp is None and res.tau_star is None

    def test_pulseless_nbar_sweep_monotone(self):
        res = violation_scan("pulseless", "nbar", list(np.linspace(0, 3, 60)),
                             lam=0.5, omega=1.0)
        ratios = [p.w_ratio for p in res.points]
        assert all(b <= a + 1e-12 for a, b in zip(ratios, ratios[1:]))
        assert ratios[0] > 0

    def test_pulsed_violation_ceases_at_order_one_nbar(self):
        omega = 2 * math.pi * 100
        tau = 0.1 * math.pi / omega
        res = violation_scan("pulsed", "nbar", list(np.linspace(0, 20, 800)),
                             g=2 * omega, omega=omega, tau=tau)
        assert res.tau_asymp is not None
        assert 0.1 < res.tau_asymp < 10

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            violation_scan("bogus", "t", [0.1, 0.2])
        with pytest.raises(ValueError):
            violation_scan("pulsed", "t", [0.2, 0.1])

    def test_t_fixed_pulseless(self):
        assert t_fixed_pulseless(2.0) == pytest.approx(math.pi / 2.0)
