r"""Force-sensing noise budget: projection noise, measurement backaction,
thermal dephasing, standard-quantum-limit solvers and squeezing-enhanced
readout.

Phase conventions: the signal phase is phi = int K(s) f(s) ds with K the
sequence response kernel and f the force in natural units (Hamiltonian term
-f (a + a^dag)). The per-shot noise-to-signal ratio at force f = 1 is

    NSR = (1/(4 N_s) + N_s Dn^2 xi + V_th) / phi^2,

with Dn the backaction phonon number, xi the cooling duty-cycle factor and
V_th the bath-induced phase variance of the same sequence-filtered kernel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from . import pulses
from .constants import HBAR, KB
from .pulses import PulseSequence
from .units import PhysicalParams, to_natural


@dataclass(frozen=True)
class NoiseBudget:
    projection_var: float
    backaction_var: float
    thermal_var: float
    signal_phase_per_force: float

    def __post_init__(self) -> None:
        if min(self.projection_var, self.backaction_var, self.thermal_var) < 0:
            raise ValueError("noise terms must be >= 0")


@dataclass(frozen=True)
class SensitivityPoint:
    sweep_value: float
    eta: float  # N/sqrt(Hz)
    budget: NoiseBudget


def cooling_factor(gamma_c: float, t_c: float) -> float:
    """xi = e^{-gamma_c t_c} / (1 - e^{-gamma_c t_c})."""
    x = gamma_c * t_c
    if x <= 0:
        raise ValueError("gamma_c * t_c must be > 0 (xi diverges)")
    if x > 700.0:  # expm1 would overflow; xi is exp(-x) to double precision
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def backaction_occupation(delta_n: float, xi: float) -> float:
    """Steady-state oscillator occupation n* = xi * Dn."""
    if delta_n < 0 or xi < 0:
        raise ValueError("delta_n and xi must be >= 0")
    return delta_n * xi


def noise_to_signal(
    phi_per_f: float,
    delta_n: float,
    xi: float,
    n_spins: float = 1.0,
    thermal_var: float = 0.0,
) -> float:
    """(1/(4 N_s) + N_s Dn^2 xi + V_th) / phi^2; inf when phi = 0."""
    if phi_per_f == 0.0:
        return math.inf
    return (1.0 / (4 * n_spins) + n_spins * delta_n ** 2 * xi + thermal_var) / phi_per_f ** 2


def thermal_dephasing(lam: float, nbar_over_q: float, omega: float, tau: float) -> float:
    """Bath contribution to Var(S_x) over one free-evolution window:
    (1/2) lam^2 (nbar/Q) [6 wt - 8 sin wt + sin 2wt]."""
    if nbar_over_q < 0:
        raise ValueError("nbar_over_q must be >= 0")
    th = omega * tau
    return 0.5 * lam * lam * nbar_over_q * (6 * th - 8 * math.sin(th) + math.sin(2 * th))


def thermal_phase_variance(seq: PulseSequence, g: float, omega: float, nbar_over_q: float) -> float:
    """Bath-induced variance of the signal phase: 2 omega (nbar/Q) int K^2 ds.

    The white-noise force correlator 2 omega (nbar/Q) delta(t - t') filtered
    through the sequence kernel. For a pulse-free window this equals one
    quarter of thermal_dephasing (the spin-variance formula counts the full
    relative branch phase, twice the signal phase).
    """
    if nbar_over_q < 0:
        raise ValueError("nbar_over_q must be >= 0")
    return 2 * omega * nbar_over_q * pulses.kernel_l2(seq, g, omega)


def force_sql(kind, omega: float, tau: float, xi: float) -> float:
    """Optimal-coupling noise-to-signal at unit force, sqrt(sqrt(xi) Dn/g^2) / |phi/(g f)|.

    g-independent by construction; at small omega*tau proportional to the
    leading-order scalings 6/(w t^2), 2/t, w for the three named sequences.
    """
    seq = pulses.make_sequence(kind, tau)
    a = pulses.residual_displacement(seq, 1.0, omega)[1]  # Dn / g^2
    phi_per_gf = abs(pulses.dc_phase(seq, 1.0, omega))  # |phi / (g f)|
    if phi_per_gf == 0.0:
        return math.inf
    return math.sqrt(math.sqrt(xi) * a) / phi_per_gf


class UnboundedCouplingError(ValueError):
    """Raised when Dn = 0 leaves the optimal coupling unbounded."""


def optimal_coupling(kind, omega: float, tau: float, xi: float, n_spins: float = 1.0) -> float:
    """Balance point of projection and backaction noise: g* = 1/sqrt(2 N_s (Dn/g^2) sqrt(xi))."""
    seq = pulses.make_sequence(kind, tau)
    a = pulses.residual_displacement(seq, 1.0, omega)[1]
    # Dn/g^2 at a refocusing point (e.g. Ramsey with omega tau = 2 pi n) is
    # zero up to rounding of sin; compare against the tau^2 leading scale
    if a <= 1e-28 * tau * tau:
        raise UnboundedCouplingError(
            "sequence leaves zero residual displacement; optimal coupling is unbounded"
        )
    return 1.0 / math.sqrt(2.0 * n_spins * a * math.sqrt(xi))


def projection_limit_eta(mass: float, omega: float, gradient: float, t2_star: float, gamma_e: float) -> float:
    """Spin-projection-limited sensitivity 2 m w^2 / (gamma_e dB sqrt(T2*))."""
    return 2 * mass * omega ** 2 / (gamma_e * gradient * math.sqrt(t2_star))


def thermal_limit_eta(mass: float, omega: float, q_factor: float, temperature: float) -> float:
    """Thermal force noise floor sqrt(4 m (w/Q) k_B T)."""
    return math.sqrt(4 * mass * (omega / q_factor) * KB * temperature)


def sql_gradient(mass: float, t_between: float, tau_precess: float, n_spins: float, gamma_e: float) -> float:
    """Optimal gradient at the position SQL: 1 / (gamma_e tau sqrt(N_s) dx_SQL),
    dx_SQL = sqrt(hbar t / m)."""
    dx = math.sqrt(HBAR * t_between / mass)
    return 1.0 / (gamma_e * tau_precess * math.sqrt(n_spins) * dx)


def force_sensitivity(
    params: PhysicalParams,
    seq: PulseSequence,
    nu: float,
    *,
    coupling: float | None = None,
    include_thermal: bool = True,
) -> SensitivityPoint:
    """Force sensitivity eta(nu) in N/sqrt(Hz) at angular signal frequency nu.

    eta = sqrt(NSR(nu) (tau + t_c)) * hbar / x0, with the coupling set to the
    projection/backaction balance point unless given explicitly.
    """
    nat = to_natural(params)
    omega, tau = nat.omega, seq.total_time
    xi = cooling_factor(params.cooling_rate, params.cooling_time)
    if coupling is None:
        a = pulses.residual_displacement(seq, 1.0, omega)[1]
        if a == 0.0:
            raise UnboundedCouplingError(
                "sequence leaves zero residual displacement; optimal coupling is unbounded"
            )
        g = 1.0 / math.sqrt(2.0 * params.n_spins * a * math.sqrt(xi))
    else:
        g = coupling
    delta_n = pulses.residual_displacement(seq, g, omega)[1]
    phi_per_f = abs(pulses.spectral_response(seq, g, omega, nu))
    nbar_over_q = nat.nbar / params.quality_factor
    v_th = thermal_phase_variance(seq, g, omega, nbar_over_q) if include_thermal else 0.0
    budget = NoiseBudget(
        projection_var=1.0 / (4 * params.n_spins),
        backaction_var=params.n_spins * delta_n ** 2 * xi,
        thermal_var=v_th,
        signal_phase_per_force=phi_per_f,
    )
    nsr = noise_to_signal(phi_per_f, delta_n, xi, params.n_spins, v_th)
    eta = math.sqrt(nsr * (tau + params.cooling_time)) * HBAR / nat.x0
    return SensitivityPoint(nu, eta, budget)


def squeezed_rotation(n_spins: float, zeta: float):
    """Squeezing-readout rotation angle and spin shot-noise reduction factor.

    Returns (theta, factor) with theta = -arctan(4/kappa + kappa/2) and
    factor = 1/sqrt(1 + (kappa/4)^2), kappa = N_s zeta.
    """
    kappa = n_spins * zeta
    if abs(kappa) > math.sqrt(n_spins):
        warnings.warn(
            "N_s zeta exceeds sqrt(N_s); Gaussian squeezing treatment marginal",
            stacklevel=2,
        )
    theta = -math.pi / 2 if kappa == 0 else -math.atan(4.0 / kappa + kappa / 2.0)
    factor = 1.0 / math.sqrt(1.0 + (kappa / 4.0) ** 2)
    return theta, factor
