"""Static zero-voltage-state solution of a symmetric dc SQUID.

The SQUID is described by the reduced phases ``gamma_bar = (g1 + g2)/2`` and
``delta_gamma = (g1 - g2)/2`` of its two junctions.  In the static limit the
bias and circulating currents satisfy

    Ib = 2 I0 cos(delta_gamma) sin(gamma_bar)
    J  = I0 cos(gamma_bar) sin(delta_gamma)

with the loop flux constraint ``delta_gamma = pi (Phi_s - L J / Phi0)``
(integration constant fixed so that delta_gamma = 0 at Phi_s = 0, J = 0).
All solvers track the branch continuously connected to the trivial solution
at zero bias and zero flux.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .constants import PH, PHI0, PHI0_UA_PH, UA
from .errors import BeyondCritical, NoConvergence, SingularPhase

#: Relative convergence tolerance on phases (Newton iterations).
PHASE_TOL = 1e-12
#: Residual bound on the static current equations, uA.
RESIDUAL_TOL_UA = 1e-10
MAX_NEWTON_ITER = 50


@dataclass(frozen=True)
class SquidParams:
    """Geometric and junction parameters of the coupler SQUID.

    Attributes
    ----------
    L_pH:
        Loop inductance in pH.
    C_fF:
        Capacitance of each junction in fF.
    I0_uA:
        Critical current of each junction in uA.
    """

    L_pH: float
    C_fF: float
    I0_uA: float

    def __post_init__(self):
        if self.L_pH <= 0 or self.C_fF <= 0 or self.I0_uA <= 0:
            raise ValueError("SquidParams requires L, C, I0 > 0")

    @property
    def beta_L(self) -> float:
        """Screening parameter 2 L I0 / Phi0 (dimensionless)."""
        return 2.0 * self.L_pH * self.I0_uA / PHI0_UA_PH

    @property
    def josephson_inductance_pH(self) -> float:
        """Zero-phase Josephson inductance of one junction, Phi0 / (2 pi I0), in pH."""
        return PHI0_UA_PH / (2.0 * math.pi * self.I0_uA)


@dataclass(frozen=True)
class WorkingPoint:
    """Static phase configuration of the biased SQUID.

    ``phi_s`` is stored reduced to the canonical window [-0.5, 0.5] (units of
    Phi0); all phases refer to that window, which the flux constraint's
    integration-constant convention makes one-to-one with the physical state.
    """

    gamma_bar: float
    delta_gamma: float
    J_uA: float
    Ib_uA: float
    phi_s: float


def _reduce_flux(phi_s: float) -> float:
    """Map applied flux (Phi0 units) into the canonical window [-0.5, 0.5]."""
    reduced = phi_s - round(phi_s)
    # round() sends +/-0.5 to the even side; keep the caller's sign there.
    if reduced == -0.5 and phi_s > 0:
        reduced = 0.5
    return reduced


def _solve_delta_gamma(params: SquidParams, phi_r: float, cos_gbar: float) -> float:
    """Self-consistent delta_gamma at fixed gamma_bar and reduced flux.

    Solves dg = pi*phi_r - (pi*beta_L/2) * cos_gbar * sin(dg).  The left side
    minus the right is strictly increasing for beta_L < 2/pi, so the root is
    unique and bracketed by [-pi, pi] for phi_r in [-0.5, 0.5].
    """
    k = 0.5 * math.pi * params.beta_L * cos_gbar
    target = math.pi * phi_r

    def g(dg: float) -> float:
        return dg - target + k * math.sin(dg)

    return brentq(g, -math.pi, math.pi, xtol=1e-15, rtol=8.9e-16)


def static_residuals_uA(
    params: SquidParams, gamma_bar: float, delta_gamma: float, Ib_uA: float, phi_r: float
) -> tuple[float, float]:
    """Residuals of the two static current equations, both in uA.

    The first is the bias-current equation; the second is the circulating
    current implied by the flux constraint minus the junction expression.
    """
    i0 = params.I0_uA
    r1 = Ib_uA - 2.0 * i0 * math.cos(delta_gamma) * math.sin(gamma_bar)
    j_from_flux = (phi_r - delta_gamma / math.pi) * PHI0_UA_PH / params.L_pH
    r2 = j_from_flux - i0 * math.cos(gamma_bar) * math.sin(delta_gamma)
    return r1, r2


def _newton_step(
    params: SquidParams, gbar: float, dg: float, Ib_uA: float, phi_r: float
) -> tuple[float, float]:
    i0 = params.I0_uA
    f1, f2 = static_residuals_uA(params, gbar, dg, Ib_uA, phi_r)
    # Jacobian of (f1, f2) with respect to (gamma_bar, delta_gamma).
    j11 = -2.0 * i0 * math.cos(dg) * math.cos(gbar)
    j12 = 2.0 * i0 * math.sin(dg) * math.sin(gbar)
    j21 = i0 * math.sin(gbar) * math.sin(dg)
    j22 = -PHI0_UA_PH / (math.pi * params.L_pH) - i0 * math.cos(gbar) * math.cos(dg)
    det = j11 * j22 - j12 * j21
    if det == 0.0:
        raise NoConvergence("singular Jacobian in static Newton iteration")
    dgbar = -(f1 * j22 - f2 * j12) / det
    ddg = -(j11 * f2 - j21 * f1) / det
    return gbar + dgbar, dg + ddg


def _newton_refine(
    params: SquidParams, gbar: float, dg: float, Ib_uA: float, phi_r: float
) -> tuple[float, float]:
    for _ in range(MAX_NEWTON_ITER):
        gbar_new, dg_new = _newton_step(params, gbar, dg, Ib_uA, phi_r)
        step = max(abs(gbar_new - gbar), abs(dg_new - dg))
        gbar, dg = gbar_new, dg_new
        if step < PHASE_TOL * max(1.0, abs(gbar), abs(dg)):
            return gbar, dg
    raise NoConvergence(
        f"Newton did not converge at Ib={Ib_uA} uA, phi_s={phi_r} Phi0"
    )


def solve_working_point(params: SquidParams, Ib_uA: float, phi_s: float) -> WorkingPoint:
    """Solve the static SQUID equations on the zero-voltage branch.

    Uses Newton iteration on (gamma_bar, delta_gamma) with continuation in
    bias current from the analytically known Ib = 0 solution, which keeps the
    result on the branch continuously connected to (0, 0) at zero bias and
    flux.  Deterministic: identical inputs produce bit-identical outputs.

    Raises
    ------
    BeyondCritical
        If ``Ib_uA`` is at or above the critical current at this flux.
    NoConvergence
        If the Newton/continuation iteration fails.
    """
    phi_r = _reduce_flux(phi_s)
    if Ib_uA < 0:
        raise ValueError("Ib_uA must be non-negative")
    ic = critical_current(params, phi_r)
    if Ib_uA >= ic:
        raise BeyondCritical(
            f"Ib={Ib_uA:.6g} uA >= Ic({phi_r:.6g} Phi0)={ic:.6g} uA"
        )

    # Zero-bias starting point: gamma_bar = 0, delta_gamma self-consistent.
    gbar = 0.0
    dg = _solve_delta_gamma(params, phi_r, 1.0)

    if Ib_uA > 0.0:
        n_steps = max(1, math.ceil(Ib_uA / (0.02 * ic)))
        for k in range(1, n_steps + 1):
            ib_k = Ib_uA * k / n_steps
            # Predictor along the bias equation keeps Newton in-branch.
            arg = ib_k / (2.0 * params.I0_uA * math.cos(dg))
            gbar = math.asin(min(1.0, max(-1.0, arg)))
            gbar, dg = _newton_refine(params, gbar, dg, ib_k, phi_r)

    r1, r2 = static_residuals_uA(params, gbar, dg, Ib_uA, phi_r)
    if max(abs(r1), abs(r2)) > RESIDUAL_TOL_UA:
        raise NoConvergence(
            f"static residuals {r1:.3e}, {r2:.3e} uA exceed {RESIDUAL_TOL_UA}"
        )
    j = params.I0_uA * math.cos(gbar) * math.sin(dg)
    return WorkingPoint(gamma_bar=gbar, delta_gamma=dg, J_uA=j, Ib_uA=Ib_uA, phi_s=phi_r)


def _bias_on_branch(params: SquidParams, gbar: float, phi_r: float) -> float:
    """Bias current of the candidate solution parametrized by gamma_bar."""
    dg = _solve_delta_gamma(params, phi_r, math.cos(gbar))
    return 2.0 * params.I0_uA * math.cos(dg) * math.sin(gbar)


def critical_current(params: SquidParams, phi_s: float, n_grid: int = 2000) -> float:
    """Critical current Ic(Phi_s) of the zero-voltage state, in uA.

    Parametrizes candidate solutions by gamma_bar on a dense grid over
    [0, pi/2], solves delta_gamma self-consistently at each point, and takes
    the maximum bias current, refined by bounded scalar minimization.  Even
    in Phi_s and periodic with period Phi0.
    """
    phi_r = abs(_reduce_flux(phi_s))
    grid = np.linspace(0.0, 0.5 * math.pi, n_grid)
    currents = [_bias_on_branch(params, g, phi_r) for g in grid]
    i_best = int(np.argmax(currents))
    lo = grid[max(0, i_best - 1)]
    hi = grid[min(n_grid - 1, i_best + 1)]
    if lo == hi:
        return currents[i_best]
    res = minimize_scalar(
        lambda g: -_bias_on_branch(params, g, phi_r),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(-res.fun, currents[i_best])


def _transfer_terms(params: SquidParams, wp: WorkingPoint) -> tuple[float, float]:
    """Return (1/Lj in 1/H, tan^2(delta_gamma) tan^2(gamma_bar))."""
    cos_prod = math.cos(wp.gamma_bar) * math.cos(wp.delta_gamma)
    if abs(cos_prod) < 1e-9:
        raise SingularPhase(
            "cos(gamma_bar) cos(delta_gamma) below 1e-9; too close to critical point"
        )
    inv_lj = 2.0 * math.pi * params.I0_uA * UA * cos_prod / PHI0  # 1/H
    t2 = (math.tan(wp.delta_gamma) * math.tan(wp.gamma_bar)) ** 2
    return inv_lj, t2


def re_transfer_function(params: SquidParams, wp: WorkingPoint) -> float:
    """Static flux-to-current transfer Re(dJ/dPhi_s) at fixed Ib, in 1/H.

    Evaluates (1/2Lj)(1 - tan^2 dg tan^2 gb) / (1 + (L/2Lj)(1 - tan^2 dg
    tan^2 gb)) with Lj the per-junction Josephson inductance at the working
    point.  The sign is bipolar: negative once tan(dg) tan(gb) > 1.
    """
    inv_lj, t2 = _transfer_terms(params, wp)
    numerator = 0.5 * inv_lj * (1.0 - t2)
    return numerator / (1.0 + params.L_pH * PH * numerator)


def re_transfer_smallbeta(params: SquidParams, wp: WorkingPoint) -> float:
    """Small-beta_L limit of the transfer function, (1/2Lj)(1 - tan^2 tan^2), in 1/H."""
    inv_lj, t2 = _transfer_terms(params, wp)
    return 0.5 * inv_lj * (1.0 - t2)
