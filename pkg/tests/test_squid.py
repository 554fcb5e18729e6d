import math

import numpy as np
import pytest

from squidcoupler.constants import PH, PHI0, PHI0_UA_PH, UA
from squidcoupler.errors import BeyondCritical, SingularPhase
from squidcoupler.squid import (
    SquidParams,
    WorkingPoint,
    critical_current,
    re_transfer_function,
    re_transfer_smallbeta,
    solve_working_point,
    static_residuals_uA,
)


def fixed_point_delta_gamma(params, phi_s, cos_gbar=1.0, n_iter=400):
    """Independent oracle: damped fixed-point iteration for delta_gamma."""
    dg = math.pi * phi_s
    for _ in range(n_iter):
        dg = math.pi * phi_s - 0.5 * math.pi * params.beta_L * cos_gbar * math.sin(dg)
    return dg


def scan_critical_current(params, phi_s, n=40000):
    """Independent oracle: dense scan over gamma_bar with self-consistent dg."""
    best = 0.0
    for gbar in np.linspace(0.0, math.pi / 2, n):
        dg = fixed_point_delta_gamma(params, phi_s, math.cos(gbar))
        best = max(best, 2.0 * params.I0_uA * math.cos(dg) * math.sin(gbar))
    return best


def test_beta_l_reference_value(params):
    assert params.beta_L == pytest.approx(0.092, abs=1e-3)


def test_zero_bias_zero_flux_is_trivial(params):
    wp = solve_working_point(params, 0.0, 0.0)
    assert wp.gamma_bar == 0.0
    assert wp.delta_gamma == 0.0
    assert wp.J_uA == 0.0


def test_zero_bias_working_point_matches_fixed_point_oracle(params):
    wp = solve_working_point(params, 0.0, 0.45)
    dg_oracle = fixed_point_delta_gamma(params, 0.45)
    assert wp.gamma_bar == 0.0
    assert wp.delta_gamma == pytest.approx(dg_oracle, abs=1e-12)
    assert wp.delta_gamma == pytest.approx(1.2742, abs=2e-4)
    assert wp.J_uA == pytest.approx(params.I0_uA * math.sin(dg_oracle), abs=1e-12)
    assert wp.J_uA == pytest.approx(0.4590, abs=2e-4)


def test_circulating_current_decreases_with_bias(params):
    ic = critical_current(params, 0.45)
    j_values = [
        solve_working_point(params, r * ic, 0.45).J_uA for r in (0.0, 0.4, 0.6, 0.85)
    ]
    assert all(a > b for a, b in zip(j_values, j_values[1:]))


def test_working_point_residuals_and_current_bound(params):
    ic = critical_current(params, 0.45)
    for ratio in (0.0, 0.3, 0.6, 0.9):
        wp = solve_working_point(params, ratio * ic, 0.45)
        r1, r2 = static_residuals_uA(params, wp.gamma_bar, wp.delta_gamma, wp.Ib_uA, wp.phi_s)
        assert max(abs(r1), abs(r2)) < 1e-10
        assert abs(wp.J_uA) <= params.I0_uA


def test_solver_is_deterministic(params):
    ic = critical_current(params, 0.45)
    a = solve_working_point(params, 0.7 * ic, 0.45)
    b = solve_working_point(params, 0.7 * ic, 0.45)
    assert (a.gamma_bar, a.delta_gamma, a.J_uA) == (b.gamma_bar, b.delta_gamma, b.J_uA)


def test_beyond_critical_raises(params):
    ic = critical_current(params, 0.45)
    with pytest.raises(BeyondCritical):
        solve_working_point(params, 1.01 * ic, 0.45)


def test_critical_current_against_scan_oracle(params):
    assert critical_current(params, 0.0) == pytest.approx(2.0 * params.I0_uA, rel=1e-9)
    assert critical_current(params, 0.0) == pytest.approx(0.96, abs=1e-6)
    for phi in (0.2, 0.45):
        oracle = scan_critical_current(params, phi)
        assert critical_current(params, phi) == pytest.approx(oracle, rel=1e-6)


def test_critical_current_minimum_at_half_flux(params):
    ic_half = critical_current(params, 0.5)
    for phi in (0.4, 0.45, 0.48, 0.52, 0.55, 0.6):
        assert ic_half < critical_current(params, phi)


def test_critical_current_flux_reversal_symmetry(params):
    assert abs(critical_current(params, 0.3) - critical_current(params, -0.3)) < 1e-12


def test_transfer_function_at_zero_phases(params):
    wp = solve_working_point(params, 0.0, 0.0)
    lj0 = PHI0 / (2.0 * math.pi * params.I0_uA * UA)  # H
    assert lj0 / PH == pytest.approx(685.7, abs=0.1)
    expected = (0.5 / lj0) / (1.0 + params.L_pH * PH / (2.0 * lj0))
    assert re_transfer_function(params, wp) == pytest.approx(expected, rel=1e-12)
    assert re_transfer_function(params, wp) == pytest.approx(6.36e8, rel=2e-3)
    assert re_transfer_smallbeta(params, wp) == pytest.approx(0.5 / lj0, rel=1e-12)
    assert re_transfer_smallbeta(params, wp) == pytest.approx(7.29e8, rel=2e-3)


def finite_difference_transfer(params, ib, phi_s, h=1e-6):
    j_plus = solve_working_point(params, ib, phi_s + h).J_uA
    j_minus = solve_working_point(params, ib, phi_s - h).J_uA
    return (j_plus - j_minus) / (2.0 * h) * UA / PHI0  # 1/H


def test_transfer_function_matches_finite_difference_at_paper_point(params):
    wp = solve_working_point(params, 0.0, 0.45)
    fd = finite_difference_transfer(params, 0.0, 0.45)
    re = re_transfer_function(params, wp)
    assert re == pytest.approx(fd, rel=1e-6)
    assert re == pytest.approx(2.04e8, rel=1e-2)


def test_transfer_function_finite_difference_random_points(params):
    rng = np.random.default_rng(42)
    for _ in range(50):
        phi = rng.uniform(0.05, 0.45)
        ratio = rng.uniform(0.0, 0.9)
        ic = critical_current(params, phi)
        ib = ratio * ic
        wp = solve_working_point(params, ib, phi)
        fd = finite_difference_transfer(params, ib, phi)
        re = re_transfer_function(params, wp)
        assert abs(re - fd) / max(abs(fd), 1e6) < 1e-4


def test_transfer_function_zero_when_tangent_product_is_one(params):
    # tan(pi/4) is 1 only up to float rounding; the transfer function must
    # vanish to the same rounding, nine orders below its natural scale.
    wp = WorkingPoint(gamma_bar=math.pi / 4, delta_gamma=math.pi / 4,
                      J_uA=0.0, Ib_uA=0.0, phi_s=0.0)
    scale = re_transfer_function(params, solve_working_point(params, 0.0, 0.0))
    assert abs(re_transfer_function(params, wp)) < 1e-9 * scale
    assert abs(re_transfer_smallbeta(params, wp)) < 1e-9 * scale


def test_smallbeta_negative_beyond_tangent_product_one(params):
    wp = WorkingPoint(gamma_bar=1.0, delta_gamma=1.0, J_uA=0.0, Ib_uA=0.0, phi_s=0.0)
    assert re_transfer_smallbeta(params, wp) < 0.0


def test_smallbeta_ratio_identity(params):
    wp = solve_working_point(params, 0.0, 0.45)
    t2 = (math.tan(wp.delta_gamma) * math.tan(wp.gamma_bar)) ** 2
    lj = PHI0 / (2 * math.pi * params.I0_uA * UA
                 * math.cos(wp.delta_gamma) * math.cos(wp.gamma_bar))
    expected_ratio = 1.0 + params.L_pH * PH / (2 * lj) * (1.0 - t2)
    ratio = re_transfer_smallbeta(params, wp) / re_transfer_function(params, wp)
    assert ratio == pytest.approx(expected_ratio, rel=1e-12)
    assert ratio == pytest.approx(1.043, abs=2e-3)


def test_smallbeta_agrees_with_full_to_order_beta(params):
    # The deviation between the two forms carries a state-dependent
    # prefactor |1 - tan^2 tan^2| cos(dg) cos(gb); it stays below 1.5 beta_L
    # through 0.7 Ic and below 3 beta_L out to the corner of the operating
    # range at 0.85 Ic, phi_s = 0.45 (measured 2.6 beta_L there).
    for phi in (0.0, 0.15, 0.3, 0.45):
        ic = critical_current(params, phi)
        for ratio in (0.0, 0.3, 0.55, 0.7, 0.85):
            wp = solve_working_point(params, ratio * ic, phi)
            full = re_transfer_function(params, wp)
            small = re_transfer_smallbeta(params, wp)
            scale = max(abs(full), abs(small))
            bound = 1.5 if ratio <= 0.7 else 3.0
            assert abs(small - full) / scale <= bound * params.beta_L


def test_singular_phase_near_critical(params):
    wp = WorkingPoint(gamma_bar=math.pi / 2, delta_gamma=0.3, J_uA=0.0,
                      Ib_uA=0.0, phi_s=0.0)
    with pytest.raises(SingularPhase):
        re_transfer_function(params, wp)


def test_branch_continuity_in_bias_sweep(params):
    ic = critical_current(params, 0.45)
    prev = solve_working_point(params, 0.0, 0.45)
    for ratio in np.linspace(0.0, 0.95, 101)[1:]:
        wp = solve_working_point(params, ratio * ic, 0.45)
        assert abs(wp.gamma_bar - prev.gamma_bar) < 0.2
        assert abs(wp.delta_gamma - prev.delta_gamma) < 0.2
        prev = wp


def test_gamma_bar_exactly_zero_at_zero_bias(params):
    for phi in (0.1, 0.3, 0.45):
        assert solve_working_point(params, 0.0, phi).gamma_bar == 0.0


def test_flux_periodicity(params):
    j_a = solve_working_point(params, 0.0, 0.3).J_uA
    j_b = solve_working_point(params, 0.0, 1.3).J_uA
    assert j_a == pytest.approx(j_b, abs=1e-12)
    ic_a = critical_current(params, 0.3)
    ic_b = critical_current(params, 1.3)
    assert ic_a == pytest.approx(ic_b, abs=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        SquidParams(L_pH=-1.0, C_fF=5.0, I0_uA=0.48)
    with pytest.raises(ValueError):
        SquidParams(L_pH=200.0, C_fF=0.0, I0_uA=0.48)
