"""Linearized AC response of the biased SQUID and the resulting ohmic bath.

The bias circuitry is modeled as a pure shunt resistance R (admittance
Y = 1/R).  Small flux perturbations at angular frequency omega see the
complex transfer function dJ/dPhi_s obtained by linearizing the junction
equations around the working point:

    d(gamma_bar) = [2 tan(gb) tan(dg) / Lj] / (2/Lj - 2 w^2 C + i w Y) d(dg)

propagated through the loop flux constraint.  With the e^{+i w t} convention
used here the dissipative imaginary part is non-negative,
Im(dJ/dPhi_s) ~ (w / 4R) tan^2(dg) tan^2(gb) at low beta_L, and the dynamic
resistance defined through dJ/dPhi_s = 1/Ldyn + i w / Rdyn is positive.

Each qubit couples to this loss channel through Mqs, producing an ohmic
spin-boson spectral density J(w) = alpha * w.  The 2 pi placement is fixed
as follows: ``spectral_density`` returns J(w)/2pi in GHz, i.e. alpha times
the ordinary frequency w / 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import FF, HBAR, KOHM, K_B, NS, PH, PHI0, PLANCK_H, UA
from .coupler import QubitPair
from .errors import InfiniteLifetime
from .squid import SquidParams, WorkingPoint, re_transfer_function, _transfer_terms


@dataclass(frozen=True)
class NoiseSpec:
    """Bias-circuit noise summary for one operating point."""

    R_kohm: float
    temperature_K: float = 0.05
    alpha: float | None = None

    def __post_init__(self):
        if self.R_kohm <= 0 or self.temperature_K <= 0:
            raise ValueError("R and temperature must be positive")
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be non-negative")


def linearized_response(
    params: SquidParams, wp: WorkingPoint, R_kohm: float, omega_rad_ns: float
) -> complex:
    """Complex transfer function dJ/dPhi_s at angular frequency omega, in 1/H.

    ``omega_rad_ns`` is in rad/ns (1 rad/ns = 1e9 rad/s).  At omega = 0 this
    reduces exactly to the static transfer function.
    """
    if omega_rad_ns < 0:
        raise ValueError("omega must be non-negative")
    inv_lj, t2 = _transfer_terms(params, wp)  # raises SingularPhase near Ic
    omega = omega_rad_ns / NS  # rad/s
    c = params.C_fF * FF
    y = 1.0 / (R_kohm * KOHM)
    denom = 2.0 * inv_lj - 2.0 * omega**2 * c + 1j * omega * y
    coupling = (inv_lj - omega**2 * c) - 2.0 * t2 * inv_lj**2 / denom
    return 0.5 * coupling / (1.0 + 0.5 * params.L_pH * PH * coupling)


def dynamic_resistance_ohm(
    params: SquidParams, wp: WorkingPoint, R_kohm: float, omega_rad_ns: float
) -> float:
    """Dynamic resistance Rdyn = omega / Im(dJ/dPhi_s), in Ohm (positive)."""
    im = linearized_response(params, wp, R_kohm, omega_rad_ns).imag
    if im == 0.0:
        return math.inf
    return (omega_rad_ns / NS) / im


def ohmic_alpha(
    qp: QubitPair, params: SquidParams, wp: WorkingPoint, R_kohm: float
) -> float:
    """Dimensionless ohmic coefficient of the qubit's spin-boson bath.

    alpha = (Mqs^2 Iq^2 / 4 h R) tan^2(delta_gamma) tan^2(gamma_bar);
    exactly zero at Ib = 0 (where gamma_bar = 0) and monotonically
    increasing with bias at fixed flux.  Evaluated with qubit 1's persistent
    current; identical for qubit 2 when the currents match.
    """
    t2 = (math.tan(wp.delta_gamma) * math.tan(wp.gamma_bar)) ** 2
    prefactor = (qp.Mqs_pH * PH * qp.Iq1_uA * UA) ** 2 / (
        4.0 * PLANCK_H * R_kohm * KOHM
    )
    return prefactor * t2


def spectral_density(
    qp: QubitPair,
    params: SquidParams,
    wp: WorkingPoint,
    R_kohm: float,
    omega_rad_ns: float,
) -> float:
    """Bath spectral density J(omega)/2pi in GHz at the given frequency.

    J(omega) = (Iq^2 Mqs^2 / h) |Im(dJ/dPhi_s)|; in the low-beta_L limit this
    equals alpha * omega, so the returned value is alpha * (omega / 2 pi)
    with omega in rad/ns.
    """
    im = abs(linearized_response(params, wp, R_kohm, omega_rad_ns).imag)
    rate = (qp.Iq1_uA * UA * qp.Mqs_pH * PH) ** 2 * im / PLANCK_H  # 1/s
    return rate / (2.0 * math.pi) * NS  # GHz


def dephasing_estimate(alpha: float, temperature_K: float) -> float:
    """Order-of-magnitude dephasing time hbar / (2 pi alpha kB T), in ns.

    The dephasing rate of an ohmic spin-boson environment at temperature T
    is taken as Gamma = 2 pi alpha kB T / hbar; treat the result as an
    estimate, not a full open-system calculation.
    """
    if temperature_K <= 0:
        raise ValueError("temperature must be positive")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0.0:
        raise InfiniteLifetime("alpha = 0: no bias-circuit dephasing at this point")
    return HBAR / (2.0 * math.pi * alpha * K_B * temperature_K) / NS


def noise_report(
    qp: QubitPair,
    params: SquidParams,
    wp: WorkingPoint,
    spec: NoiseSpec,
) -> NoiseSpec:
    """NoiseSpec with alpha filled in for the given working point."""
    alpha = ohmic_alpha(qp, params, wp, spec.R_kohm)
    return NoiseSpec(R_kohm=spec.R_kohm, temperature_K=spec.temperature_K, alpha=alpha)


def ohmic_ratio_grid(
    qp: QubitPair, params: SquidParams, phi_s: float, R_kohm: float, n_points: int
):
    """alpha over a uniform bias-ratio grid [0, 0.85], for plots and scans."""
    import numpy as np

    from .squid import critical_current, solve_working_point

    ic = critical_current(params, phi_s)
    ratios = np.linspace(0.0, 0.85, n_points)
    alphas = np.array(
        [
            ohmic_alpha(qp, params, solve_working_point(params, r * ic, phi_s), R_kohm)
            for r in ratios
        ]
    )
    return ratios, alphas
