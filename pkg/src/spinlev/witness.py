r"""Entanglement-witness evaluation for the spin-oscillator system.

The witness is

    W = Var(S_x) + Var(S_y + a_y q + b_y p) + Var(S_z + a_z q + b_z p),

with S_mu = sigma_mu/2 and q, p the dimensionless oscillator quadratures
(vacuum variance 1/2). Separable states obey W >= 1/2 + |a_y b_z - a_z b_y|,
so W below that bound certifies spin-oscillator entanglement.

All closed forms here describe free (pulseless) conditional evolution of an
initially x-polarized spin and a thermal oscillator state with occupation
nbar, parameterized by lam = 2 g / omega. The pulsed scheme maps onto the
same formulas with lam replaced by the effective value omega g tau^2 / 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class DegenerateMomentsError(ValueError):
    """Raised when the quadrature covariance block is singular."""


@dataclass(frozen=True)
class WitnessCoefficients:
    a_y: float
    b_y: float
    a_z: float
    b_z: float

    def __post_init__(self) -> None:
        for name in ("a_y", "b_y", "a_z", "b_z"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class WitnessResult:
    w_b: float
    w_en: float
    w_ratio: float
    n_meas: Optional[int]  # None when w_ratio <= 0 (no violation to resolve)


@dataclass(frozen=True)
class MomentRecord:
    """First and second moments needed to evaluate the witness.

    All covariances are centered; var_* are variances of S_mu = sigma_mu/2.
    """

    mean_sx: float
    mean_sy: float
    mean_sz: float
    mean_q: float
    mean_p: float
    var_sx: float
    var_sy: float
    var_sz: float
    var_q: float
    var_p: float
    cov_qp: float
    cov_syq: float
    cov_syp: float
    cov_szq: float
    cov_szp: float


def make_result(w_b: float, w_en: float) -> WitnessResult:
    ratio = (w_b - w_en) / w_b
    n = math.ceil(ratio ** -2) if ratio > 0 else None
    return WitnessResult(w_b, w_en, ratio, n)


def noiseless_moments(lam: float, nbar: float, omega: float, omega_l: float, t: float) -> MomentRecord:
    """Exact moments of the conditionally displaced thermal state at time t."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    th = omega * t
    u = 1.0 - math.cos(th)
    s = math.sin(th)
    v = (2 * nbar + 1) / 2.0  # thermal quadrature variance
    e = math.exp(-(2 * nbar + 1) * lam * lam * u)
    cl = math.cos(omega_l * t)
    sl = math.sin(omega_l * t)
    kappa = 0.5 * math.sqrt(2) * lam * v * e * cl
    return MomentRecord(
        mean_sx=e * cl / 2,
        mean_sy=e * sl / 2,
        mean_sz=0.0,
        mean_q=0.0,
        mean_p=0.0,
        var_sx=0.25 - (e * cl) ** 2 / 4,
        var_sy=0.25 - (e * sl) ** 2 / 4,
        var_sz=0.25,
        var_q=v + lam * lam * u * u / 2,
        var_p=v + lam * lam * s * s / 2,
        cov_qp=lam * lam * u * s / 2,
        cov_syq=kappa * s,
        cov_syp=-kappa * u,
        cov_szq=-math.sqrt(2) * lam * u / 4,
        cov_szp=-math.sqrt(2) * lam * s / 4,
    )


def separable_bound(c: WitnessCoefficients) -> float:
    return 0.5 + abs(c.a_y * c.b_z - c.a_z * c.b_y)


def witness_value(m: MomentRecord, c: WitnessCoefficients) -> float:
    """W evaluated from moments at given coefficients."""

    def block(var_s, cov_sq, cov_sp, a, b):
        return (
            var_s
            + a * a * m.var_q
            + b * b * m.var_p
            + 2 * a * b * m.cov_qp
            + 2 * a * cov_sq
            + 2 * b * cov_sp
        )

    return (
        m.var_sx
        + block(m.var_sy, m.cov_syq, m.cov_syp, c.a_y, c.b_y)
        + block(m.var_sz, m.cov_szq, m.cov_szp, c.a_z, c.b_z)
    )


def optimize_coefficients(m: MomentRecord, initial_guess: Optional[WitnessCoefficients] = None) -> WitnessCoefficients:
    """Minimizer of W over (a_y, b_y, a_z, b_z).

    W is quadratic in the coefficients with the same 2x2 quadrature covariance
    block M = [[Var q, Cov qp], [Cov qp, Var p]] for both spin components, so
    the stationarity system splits into two linear solves M x = -r.
    """
    mat = np.array([[m.var_q, m.cov_qp], [m.cov_qp, m.var_p]])
    evals, evecs = np.linalg.eigh(mat)
    if evals[0] <= 1e-14 * max(1.0, evals[-1]):
        null = evecs[:, 0]
        raise DegenerateMomentsError(
            f"quadrature covariance is singular along direction ({null[0]:+.4f} q, {null[1]:+.4f} p)"
        )
    ay, by = np.linalg.solve(mat, [-m.cov_syq, -m.cov_syp])
    az, bz = np.linalg.solve(mat, [-m.cov_szq, -m.cov_szp])
    return WitnessCoefficients(float(ay), float(by), float(az), float(bz))


def thermal_wb(lam: float, nbar: float, omega: float, omega_l: float, t: float) -> float:
    """Separable bound with the optimal coefficients, in closed form."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    u = 1.0 - math.cos(omega * t)
    e = math.exp(-(2 * nbar + 1) * lam * lam * u)
    return 0.5 + e * math.cos(omega_l * t) * lam * lam * u / (2 * nbar + 1 + 2 * lam * lam * u)


def thermal_wen(lam: float, nbar: float, omega: float, t: float) -> float:
    """Witness value on the entangled state at the optimal coefficients."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    u = 1.0 - math.cos(omega * t)
    n1 = 1 + 2 * nbar
    e2 = math.exp(-2 * n1 * lam * lam * u)
    return 0.5 + n1 / (4 * (n1 + 2 * lam * lam * u)) - (e2 / 4) * (1 + 2 * n1 * lam * lam * u)


def halfperiod_coefficients(lam: float, nbar: float) -> WitnessCoefficients:
    """Optimal coefficients at the half oscillator period (omega t = pi)."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    r2 = math.sqrt(2)
    return WitnessCoefficients(
        a_y=0.0,
        b_y=r2 * lam * math.exp(-2 * (2 * nbar + 1) * lam * lam),
        a_z=r2 * lam / (1 + 2 * nbar + 4 * lam * lam),
        b_z=0.0,
    )


def pulsed_effective_lambda(g: float, omega: float, tau: float) -> float:
    """Effective conditional-displacement strength of the one-pulse echo."""
    return omega * g * tau * tau / 4.0


@dataclass(frozen=True)
class BathDeltas:
    """Open-system corrections, each proportional to nbar/Q (natural units)."""

    dvar_sx: float
    dq2: float
    dp2: float
    dqp: float  # change of <qp + pq>
    dsyq: float  # change of <S_y q + q S_y>
    dsyp: float  # change of <S_y p + p S_y>


def bath_deltas(lam: float, nbar_over_q: float, omega: float, t: float) -> BathDeltas:
    if nbar_over_q < 0:
        raise ValueError("nbar_over_q must be >= 0")
    th = omega * t
    k = nbar_over_q
    r2 = math.sqrt(2)
    return BathDeltas(
        dvar_sx=0.5 * lam * lam * k * (6 * th - 8 * math.sin(th) + math.sin(2 * th)),
        dq2=k * (2 * th - math.sin(2 * th)),
        dp2=k * (2 * th + math.sin(2 * th)),
        dqp=k * 4 * math.sin(th) ** 2,
        dsyq=-8 * r2 * lam * k * math.sin(th / 2) ** 4,
        dsyp=4 * r2 * lam * k * (th / 2 - math.sin(th) + math.sin(2 * th) / 4),
    )


def bath_witness(
    lam: float,
    nbar: float,
    nbar_over_q: float,
    omega: float,
    omega_l: float,
    t: float,
    initial: str = "ground",
) -> WitnessResult:
    """Witness with continuous bath contact during the evolution.

    Coefficients are frozen at their closed-system optimum: the ground-start
    protocol uses the nbar = 0 optimum, the thermal start uses the thermal
    optimum. The bath then shifts the evaluated moments but not the bound.
    """
    if initial not in ("ground", "thermal"):
        raise ValueError("initial must be 'ground' or 'thermal'")
    nbar_state = 0.0 if initial == "ground" else nbar
    m = noiseless_moments(lam, nbar_state, omega, omega_l, t)
    c = optimize_coefficients(m)
    d = bath_deltas(lam, nbar_over_q, omega, t)
    w_en = witness_value(m, c) + (
        d.dvar_sx
        + (c.a_y ** 2 + c.a_z ** 2) * d.dq2
        + (c.b_y ** 2 + c.b_z ** 2) * d.dp2
        + (c.a_y * c.b_y + c.a_z * c.b_z) * d.dqp
        + c.a_y * d.dsyq
        + c.b_y * d.dsyp
    )
    return make_result(separable_bound(c), w_en)


@dataclass(frozen=True)
class ScanPoint:
    sweep_value: float
    w_b: float
    w_en: float
    w_ratio: float
    log10_w_ratio: float


@dataclass(frozen=True)
class ScanResult:
    sweep_name: str
    points: tuple
    tau_asymp: Optional[float]  # first grid point with w_ratio <= 0 after a positive one
    tau_star: Optional[float]  # interpolated crossing of w_ratio = 1e-3
    max_nbar: Optional[float]  # tau_star alias for nbar sweeps


RATIO_THRESHOLD = 1e-3


def violation_scan(
    mode: str,
    sweep: str,
    grid: Sequence[float],
    *,
    lam: float = 0.0,
    g: float = 0.0,
    omega: float = 1.0,
    omega_l: float = 0.0,
    tau: float = 0.0,
    nbar: float = 0.0,
    nbar_over_q: float = 0.0,
    initial: str = "ground",
) -> ScanResult:
    """Sweep t or nbar and locate where the witness violation dies.

    mode 'pulseless' uses lam directly and sweeps the evolution time t or
    nbar. mode 'pulsed' evaluates the half-period formulas at the effective
    lam of the echo sequence: sweeping t means sweeping the sequence length
    tau (so the effective lam grows as omega g tau^2 / 4 along the grid),
    while sweeping nbar uses the fixed tau argument.
    """
    if mode not in ("pulseless", "pulsed"):
        raise ValueError("mode must be 'pulseless' or 'pulsed'")
    if sweep not in ("t", "nbar"):
        raise ValueError("sweep must be 't' or 'nbar'")
    grid = list(grid)
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be nonempty and sorted increasing")

    points = []
    for x in grid:
        if mode == "pulsed":
            tau_x = x if sweep == "t" else tau
            lam_eff = pulsed_effective_lambda(g, omega, tau_x)
            t = math.pi / omega
        else:
            lam_eff = lam
            t = x if sweep == "t" else t_fixed_pulseless(omega)
        nb = nbar if sweep == "t" else x
        if nbar_over_q > 0:
            res = bath_witness(lam_eff, nb, nbar_over_q, omega, omega_l, t, initial)
            w_b, w_en = res.w_b, res.w_en
        else:
            w_b = thermal_wb(lam_eff, nb, omega, omega_l, t)
            w_en = thermal_wen(lam_eff, nb, omega, t)
        ratio = (w_b - w_en) / w_b
        points.append(
            ScanPoint(x, w_b, w_en, ratio, math.log10(ratio) if ratio > 0 else float("-inf"))
        )

    # asymptote = sign change on the grid: the first nonpositive point after
    # a positive one; an identically nonpositive scan has no landmark
    asymp = None
    seen_positive = False
    for p in points:
        if p.w_ratio > 0:
            seen_positive = True
        elif seen_positive:
            asymp = p.sweep_value
            break
    star = _first_crossing(points, RATIO_THRESHOLD)
    return ScanResult(
        sweep_name=sweep,
        points=tuple(points),
        tau_asymp=asymp,
        tau_star=star if sweep == "t" else None,
        max_nbar=star if sweep == "nbar" else None,
    )


def t_fixed_pulseless(omega: float) -> float:
    """Half oscillator period, the default witness readout time for nbar sweeps."""
    return math.pi / omega


def max_nbar_for_violation(
    g: float,
    omega: float,
    threshold: float = RATIO_THRESHOLD,
    lam_range=(1e-3, 4.0),
    n_grid: int = 2000,
) -> float:
    """Largest nbar for which a pulsed-scheme tau exists with violation
    ratio >= threshold; found by bisection on nbar over a log tau grid."""
    taus = np.sqrt(4 * np.geomspace(lam_range[0], lam_range[1], n_grid) / (omega * g))

    def peak_ratio(nb: float) -> float:
        best = -math.inf
        for tau in taus:
            lam_eff = pulsed_effective_lambda(g, omega, float(tau))
            w_b = thermal_wb(lam_eff, nb, omega, 0.0, math.pi / omega)
            w_en = thermal_wen(lam_eff, nb, omega, math.pi / omega)
            best = max(best, (w_b - w_en) / w_b)
        return best

    lo, hi = 0.0, 1.0
    while peak_ratio(hi) >= threshold:
        lo, hi = hi, hi * 2
        if hi > 1e6:
            raise ValueError("violation persists to unphysically large nbar")
    for _ in range(60):
        mid = (lo + hi) / 2
        if peak_ratio(mid) >= threshold:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def _first_crossing(points, level):
    """First downward crossing of w_ratio through level, linearly interpolated."""
    for p0, p1 in zip(points, points[1:]):
        if p0.w_ratio > level >= p1.w_ratio:
            frac = (p0.w_ratio - level) / (p0.w_ratio - p1.w_ratio)
            return p0.sweep_value + frac * (p1.sweep_value - p0.sweep_value)
    return None
