"""Acceptance criteria, one test (or pair) per numbered criterion.

Two tests encode claims the implementation does not reach with the stated
parameters and are expected to fail; see the repository notes for the
measured values:
  * criterion 7a: the pulsed violation for g/omega = 0.5 persists to
    nbar = 10.24, just outside the stated [0.1, 10] band;
  * criterion 8 (band): the CarrPurcell2 sensitivity minimum in
    [3e3, 3e4] Hz is 3.0e-21 N/rtHz, not below the 1e-22 test bound.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from spinlev import dynamics, oracle, pulses, sensing, witness
from spinlev.constants import GAMMA_E_DEFAULT
from spinlev.pulses import SequenceKind
from spinlev.units import NaturalParams, PhysicalParams, to_natural

SEED = 20250826
KINDS = (SequenceKind.RAMSEY, SequenceKind.HAHN_ECHO, SequenceKind.CARR_PURCELL2)


def nat(g, omega, nbar=0.0, q=1e6):
    return NaturalParams(g=g, omega=omega, lam=2 * g / omega, nbar=nbar,
                         gamma=omega / q, x0=1.0, larmor=0.0)


def test_criterion_01_oracle_closed_form_equivalence():
    start = time.monotonic()
    for kind in KINDS:
        for g_over_omega in (0.1, 1.0, 2.0):
            for omega_tau in (0.1, math.pi, 2 * math.pi):
                seq = pulses.make_sequence(kind, omega_tau)
                closed = dynamics.evolve_state(seq, g_over_omega, 1.0)
                n_max = oracle.suggested_n_max((4 * g_over_omega) ** 2 + 1)
                st = oracle.evolve(oracle.initial_state(0j, n_max),
                                   nat(g_over_omega, 1.0), seq)
                fid = oracle.branch_fidelity(closed, st)
                assert fid > 1 - 1e-8, (kind, g_over_omega, omega_tau, fid)
    assert time.monotonic() - start < 300.0


def test_criterion_02_squeezing_closed_forms():
    g, omega = 0.7, 1.0
    for kind in KINDS:
        for omega_tau in np.linspace(2 * math.pi / 100, 2 * math.pi, 100):
            seq = pulses.make_sequence(kind, float(omega_tau))
            exact = pulses.squeezing_parameter(seq, g, omega)
            closed = pulses.zeta_closed_form(kind, g, omega, float(omega_tau))
            if closed != 0:
                assert abs(exact - closed) / abs(closed) <= 1e-10


def test_criterion_03_backaction_zeros():
    g, omega = 1.0, 1.0
    for n in (1, 2, 3):
        _, dn = pulses.residual_displacement(pulses.ramsey(2 * math.pi * n), g, omega)
        assert dn < 1e-12 * g**2 / omega**2
    for omega_tau in np.linspace(0.05, 2 * math.pi, 60):
        seq = pulses.carr_purcell2(float(omega_tau))
        _, dn = pulses.residual_displacement(seq, g, omega)
        closed = (g**2 / omega**2) * 64 * math.sin(omega_tau / 8) ** 4 \
            * math.sin(omega_tau / 4) ** 2
        if closed > 1e-20:
            assert abs(dn - closed) / closed <= 1e-10


def test_criterion_04_witness_identities():
    omega = 1.0
    for lam in np.linspace(0.0, 2.0, 21):
        for nbar in np.linspace(0.0, 10.0, 11):
            lhs = witness.separable_bound(
                witness.halfperiod_coefficients(float(lam), float(nbar)))
            rhs = witness.thermal_wb(float(lam), float(nbar), omega, 0.0,
                                     math.pi / omega)
            assert abs(lhs - rhs) <= 1e-12
    assert witness.thermal_wb(0.0, 3.0, omega, 0.0, 1.7) == 0.5
    assert witness.thermal_wen(0.0, 3.0, omega, 1.7) == 0.5


def test_criterion_05_witness_oracle_agreement():
    lam, omega = 0.5, 1.0
    g = lam * omega / 2
    t = math.pi / omega
    est = oracle.witness_moments(nat(g, omega), t)
    assert abs(est.w_en - witness.thermal_wen(lam, 0.0, omega, t)) <= 1e-8
    for nbar in (0.5, 1.0, 2.0):
        cfg = oracle.OracleConfig(n_trajectories=10000, seed=SEED)
        mc = oracle.witness_moments(
            nat(g, omega, nbar), t, cfg, nbar=nbar,
            coefficients=witness.halfperiod_coefficients(lam, nbar))
        closed = witness.thermal_wen(lam, nbar, omega, t)
        assert abs(mc.w_en - closed) <= 3 * mc.w_en_se, nbar


def test_criterion_06_bath_monte_carlo():
    start = time.monotonic()
    lam, omega = 0.5, 1.0
    g = lam * omega / 2
    for nbar_over_q in (1e-3, 1.0):
        for omega_t in (math.pi / 2, math.pi, 2 * math.pi):
            seq = pulses.ramsey(omega_t / omega)
            cfg = oracle.OracleConfig(n_trajectories=1500, seed=SEED)
            stats = oracle.thermal_trajectories(nat(g, omega), seq, cfg,
                                                nbar_over_q)
            d = witness.bath_deltas(lam, nbar_over_q, omega, omega_t / omega)
            closed = dict(dvar_sx=d.dvar_sx, dq2=d.dq2, dp2=d.dp2, dqp=d.dqp,
                          dsyq=d.dsyq, dsyp=d.dsyp)
            for name, value, se in stats.as_pairs():
                assert abs(value - closed[name]) <= 3 * se, \
                    (name, nbar_over_q, omega_t)
    assert time.monotonic() - start < 600.0


def test_criterion_07a_pulsed_truncation_band():
    # EXPECTED FAILURE: the g/omega = 0.5 crossing sits at nbar = 10.24,
    # slightly above the stated order-one band [0.1, 10]
    omega = 2 * math.pi * 100
    tau = 0.1 * math.pi / omega
    for g_over_omega in (0.5, 1.0, 2.0):
        lam = witness.pulsed_effective_lambda(g_over_omega * omega, omega, tau)

        def violation(nbar):
            return (witness.thermal_wb(lam, nbar, omega, 0.0, math.pi / omega)
                    - witness.thermal_wen(lam, nbar, omega, math.pi / omega))

        cease = brentq(violation, 0.05, 100.0)
        assert 0.1 <= cease <= 10.0, (g_over_omega, cease)


def test_criterion_07b_max_nbar_g_independent():
    omega = 2 * math.pi * 100
    vals = [witness.max_nbar_for_violation(r * omega, omega)
            for r in (0.5, 1.0, 2.0)]
    assert (max(vals) - min(vals)) / min(vals) <= 0.05


def reference_params():
    # 1 um diamond at 3.5 g/cm^3 (m = 1.5e-14 kg), 100 Hz trap, Q = 1e6,
    # nbar/Q = 1, cooling 1 kHz for 100 us, optimal coupling, tau = 100 us
    return PhysicalParams(mass=1.5e-14, trap_frequency=2 * math.pi * 100,
                          gradient=1.0, nbar=1e6, quality_factor=1e6,
                          cooling_rate=1e3, cooling_time=1e-4)


def test_criterion_08_sensitivity_shape():
    p = reference_params()
    tau = 1e-4
    omega = p.trap_frequency
    for kind in KINDS:
        seq = pulses.make_sequence(kind, tau)
        e1 = sensing.force_sensitivity(p, seq, 2 * math.pi * 1.0).eta
        e10 = sensing.force_sensitivity(p, seq, 2 * math.pi * 10.0).eta
        assert abs(e1 / e10 - 1) < 0.01, kind  # flat at low nu
    dc = {k: abs(pulses.dc_phase(pulses.make_sequence(k, tau), 1.0, omega))
          for k in KINDS}
    assert (dc[SequenceKind.CARR_PURCELL2] < dc[SequenceKind.HAHN_ECHO]
            < dc[SequenceKind.RAMSEY])


def test_criterion_08_sensitivity_band_minimum():
    # EXPECTED FAILURE: measured minimum is 3.0e-21 N/rtHz with the declared
    # NSR-to-eta composition; the 1e-23 target with a one-decade allowance
    # is not reached
    p = reference_params()
    seq = pulses.carr_purcell2(1e-4)
    best = min(sensing.force_sensitivity(p, seq, 2 * math.pi * float(nu)).eta
               for nu in np.geomspace(3e3, 3e4, 120))
    assert best < 1e-22, best


def test_criterion_09_si_anchors_within_factor_3():
    def factor(a, b):
        return max(a / b, b / a)

    eta = sensing.projection_limit_eta(1e-12, 2 * math.pi * 1e6, 1e4, 1e-6,
                                       GAMMA_E_DEFAULT)
    assert factor(eta, 5e-11) <= 3.0

    grad = sensing.sql_gradient(1.8e-15, 300e-6, 300e-6, 1.0, GAMMA_E_DEFAULT)
    assert factor(grad, 7500.0) <= 3.0

    n = to_natural(PhysicalParams(mass=3e-15, trap_frequency=2 * math.pi * 100,
                                  gradient=1e4, nbar=0.0))
    ratio_rad = n.g / n.omega
    ratio_hz = ratio_rad / (2 * math.pi)  # gyromagnetic ratio quoted in Hz/T
    assert min(factor(ratio_rad, 2.0), factor(ratio_hz, 2.0)) <= 3.0


def test_criterion_10_sql_structure():
    omega, tau, xi = 2 * math.pi * 100, 1e-4, 0.25
    for kind in KINDS:
        seq = pulses.make_sequence(kind, tau)
        gstar = sensing.optimal_coupling(kind, omega, tau, xi)
        dn = pulses.residual_displacement(seq, gstar, omega)[1]
        assert abs(0.25 - dn * dn * xi) / 0.25 <= 1e-9
        vals = []
        for g in np.geomspace(gstar / 10, gstar * 10, 9):
            a = pulses.residual_displacement(seq, g, omega)[1] / g**2
            phi = abs(pulses.dc_phase(seq, g, omega)) / g
            vals.append(math.sqrt(math.sqrt(xi) * a) / phi)
        assert (max(vals) - min(vals)) / min(vals) <= 1e-9


def test_criterion_11_squeezed_readout():
    for n_spins in (100, 10000):
        for kappa in np.linspace(0.1, 3.0, 30):
            zeta = kappa / n_spins
            theta, factor = sensing.squeezed_rotation(n_spins, zeta)
            assert factor <= 1.0
            oracle_factor = oracle.gaussian_noise_factor(n_spins, zeta, theta)
            assert abs(factor - oracle_factor) / factor <= 0.05, kappa


def test_criterion_12_verify_determinism(tmp_path):
    outputs = []
    for threads in (1, 4, 8):
        out = tmp_path / f"report-{threads}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "spinlev.cli", "verify",
             "--seed", str(SEED), "--threads", str(threads),
             "--out", str(out)],
            capture_output=True, text=True)
        # exit code 1 is expected: the suite includes the two documented
        # failing figure-anchor checks
        assert proc.returncode in (0, 1), proc.stderr
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    report = json.loads(outputs[0])
    assert report["n_checks"] >= 12
