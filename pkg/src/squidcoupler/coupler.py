"""Qubit-qubit coupling energies mediated by the biased SQUID.

Two flux qubits couple directly through their mutual inductance (fixed,
negative) and indirectly through the SQUID's circulating-current response
(bias-tunable, bipolar).  All coupling energies are returned as frequencies
K/h in GHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .constants import PH, PHI0_UA_PH, UA, joule_to_ghz
from .errors import CouplerError, NoSignChange
from .squid import SquidParams, WorkingPoint, critical_current, solve_working_point
from .squid import re_transfer_function


@dataclass(frozen=True)
class QubitPair:
    """Both qubits' circuit parameters and their couplings to the SQUID.

    Attributes
    ----------
    Iq1_uA, Iq2_uA:
        Persistent currents of qubits 1 and 2, uA.
    delta1_GHz, delta2_GHz:
        Tunnel frequencies delta_i/h, GHz.
    eps1_GHz, eps2_GHz:
        Static energy biases eps_i^0/h, GHz.
    Mqs_pH:
        Qubit-SQUID mutual inductance (identical for both qubits), pH.
    Mqq_pH:
        Direct qubit-qubit mutual inductance, pH.
    """

    Iq1_uA: float
    Iq2_uA: float
    delta1_GHz: float
    delta2_GHz: float
    eps1_GHz: float
    eps2_GHz: float
    Mqs_pH: float
    Mqq_pH: float

    def __post_init__(self):
        if min(self.Iq1_uA, self.Iq2_uA, self.delta1_GHz, self.delta2_GHz, self.Mqs_pH) <= 0:
            raise ValueError("Iq, delta, Mqs must all be positive")
        if self.Mqq_pH < 0:
            raise ValueError("Mqq must be non-negative")

    @property
    def splitting1_GHz(self) -> float:
        """Level splitting sqrt(eps1^2 + delta1^2) of qubit 1, GHz."""
        return math.hypot(self.eps1_GHz, self.delta1_GHz)

    @property
    def splitting2_GHz(self) -> float:
        """Level splitting sqrt(eps2^2 + delta2^2) of qubit 2, GHz."""
        return math.hypot(self.eps2_GHz, self.delta2_GHz)


class SweepPoint(NamedTuple):
    """One row of a bias sweep, carrying the raw working point for debugging."""

    ib_ratio: float
    Ib_uA: float
    gamma_bar: float
    delta_gamma: float
    J_uA: float
    K0_GHz: float
    Ks_GHz: float
    K_GHz: float


class BetaPoint(NamedTuple):
    """One row of a beta_L sweep; Ks_GHz is NaN when the point failed to solve."""

    beta_L: float
    I0_uA: float
    Ic_uA: float
    Ks_GHz: float


def direct_coupling(qp: QubitPair) -> float:
    """Fixed mutual-inductance coupling K0/h = -2 Mqq |Iq1| |Iq2| / h, GHz."""
    k0 = -2.0 * qp.Mqq_pH * PH * abs(qp.Iq1_uA) * abs(qp.Iq2_uA) * UA * UA
    return joule_to_ghz(k0)


def squid_coupling(qp: QubitPair, params: SquidParams, wp: WorkingPoint) -> float:
    """SQUID-mediated coupling Ks/h = -2 Mqs^2 |Iq1| |Iq2| Re(dJ/dPhi_s) / h, GHz."""
    re = re_transfer_function(params, wp)
    ks = -2.0 * (qp.Mqs_pH * PH) ** 2 * abs(qp.Iq1_uA) * abs(qp.Iq2_uA) * UA * UA * re
    return joule_to_ghz(ks)


def net_coupling(qp: QubitPair, params: SquidParams, Ib_uA: float, phi_s: float) -> float:
    """Net coupling K/h = (K0 + Ks)/h at the given bias point, GHz."""
    wp = solve_working_point(params, Ib_uA, phi_s)
    return direct_coupling(qp) + squid_coupling(qp, params, wp)


def coupling_vs_bias(
    qp: QubitPair, params: SquidParams, phi_s: float, n_points: int
) -> list[SweepPoint]:
    """Net coupling versus bias current on a uniform grid from 0 to 0.95 Ic."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    ic = critical_current(params, phi_s)
    k0 = direct_coupling(qp)
    rows = []
    for ratio in np.linspace(0.0, 0.95, n_points):
        ib = ratio * ic
        wp = solve_working_point(params, ib, phi_s)
        ks = squid_coupling(qp, params, wp)
        rows.append(
            SweepPoint(
                ib_ratio=float(ratio),
                Ib_uA=ib,
                gamma_bar=wp.gamma_bar,
                delta_gamma=wp.delta_gamma,
                J_uA=wp.J_uA,
                K0_GHz=k0,
                Ks_GHz=ks,
                K_GHz=k0 + ks,
            )
        )
    return rows


def find_decoupling_bias(
    qp: QubitPair, params: SquidParams, phi_s: float, tol_GHz: float = 1e-6
) -> float:
    """Bias ratio Ib/Ic at which the net coupling crosses zero.

    Scans K(Ib) on (0, 0.95 Ic) for a sign change and refines it by bisection
    until |K|/h < ``tol_GHz``.  Raises NoSignChange if the coupling keeps its
    sign on the whole interval.
    """
    ic = critical_current(params, phi_s)

    def k_of_ratio(r: float) -> float:
        return net_coupling(qp, params, r * ic, phi_s)

    ratios = np.linspace(0.0, 0.95, 60)
    values = [k_of_ratio(r) for r in ratios]
    bracket = None
    for (r_lo, k_lo), (r_hi, k_hi) in zip(zip(ratios, values), zip(ratios[1:], values[1:])):
        if k_lo == 0.0:
            return float(r_lo)
        if k_lo * k_hi < 0.0:
            bracket = (r_lo, r_hi)
            break
    if bracket is None:
        raise NoSignChange(f"net coupling does not cross zero at phi_s={phi_s}")
    root = brentq(k_of_ratio, *bracket, xtol=1e-12)
    # Tighten until the coupling itself, not just the ratio, is below tolerance.
    if abs(k_of_ratio(root)) > tol_GHz:
        root = brentq(k_of_ratio, root - 1e-6, root + 1e-6, xtol=1e-15)
    return float(root)


def max_ks_vs_beta(
    qp: QubitPair,
    params_template: SquidParams,
    beta_grid,
    phi_s: float = 0.45,
    bias_fraction: float = 0.85,
) -> list[BetaPoint]:
    """Highest achievable Ks versus beta_L at fixed loop inductance.

    For each screening parameter the junction critical current is set to
    I0 = beta_L Phi0 / 2L (L held at the template value) and Ks is evaluated
    at Ib = ``bias_fraction`` * Ic(phi_s).  Points where the solver fails are
    reported with Ks = NaN rather than aborting the sweep.
    """
    rows = []
    for beta in beta_grid:
        if not 0.005 < beta < 1.0:
            raise ValueError("beta_L grid must lie within (0.005, 1)")
        i0 = beta * PHI0_UA_PH / (2.0 * params_template.L_pH)
        params = replace(params_template, I0_uA=i0)
        try:
            ic = critical_current(params, phi_s)
            wp = solve_working_point(params, bias_fraction * ic, phi_s)
            ks = squid_coupling(qp, params, wp)
        except CouplerError:
            rows.append(BetaPoint(beta_L=float(beta), I0_uA=i0, Ic_uA=math.nan, Ks_GHz=math.nan))
            continue
        rows.append(BetaPoint(beta_L=float(beta), I0_uA=i0, Ic_uA=ic, Ks_GHz=ks))
    return rows


def bias_shift(
    qp: QubitPair,
    params: SquidParams,
    Ib_uA: float,
    phi_s: float,
    Ib_ref_uA: float,
) -> float:
    """Qubit energy shift from the change in SQUID circulating current, GHz.

    delta_eps/h = 2 |Iq| Mqs (J(Ib) - J(Ib_ref)) / h.  Signed by the current
    difference; how the shift enters eps_i is a convention fixed when
    calibrating the schedule crosstalk (see dynamics.Crosstalk).
    """
    j_new = solve_working_point(params, Ib_uA, phi_s).J_uA
    j_ref = solve_working_point(params, Ib_ref_uA, phi_s).J_uA
    shift = 2.0 * abs(qp.Iq1_uA) * UA * qp.Mqs_pH * PH * (j_new - j_ref) * UA
    return joule_to_ghz(shift)
