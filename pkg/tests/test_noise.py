import math

import numpy as np
import pytest

from squidcoupler.errors import InfiniteLifetime
from squidcoupler.noise import (
    NoiseSpec,
    dephasing_estimate,
    dynamic_resistance_ohm,
    linearized_response,
    ohmic_alpha,
    spectral_density,
)
from squidcoupler.squid import critical_current, re_transfer_function, solve_working_point
from squidcoupler.coupler import find_decoupling_bias

R_KOHM = 2.4


@pytest.fixture(scope="module")
def wp_decoupling(qp, params):
    ic = critical_current(params, 0.45)
    ratio = find_decoupling_bias(qp, params, 0.45)
    return solve_working_point(params, ratio * ic, 0.45)


def closed_form_im(params, wp, omega_rad_ns):
    """Low-beta_L imaginary part (omega / 4R) tan^2(dg) tan^2(gb), in 1/H."""
    t2 = (math.tan(wp.delta_gamma) * math.tan(wp.gamma_bar)) ** 2
    return (omega_rad_ns / 1e-9) / (4.0 * R_KOHM * 1e3) * t2


def test_linearized_response_static_limit(qp, params, wp_decoupling):
    lr = linearized_response(params, wp_decoupling, R_KOHM, 0.0)
    assert lr.imag == 0.0
    assert lr.real == pytest.approx(re_transfer_function(params, wp_decoupling), rel=1e-9)


def test_static_limit_random_points(params):
    rng = np.random.default_rng(3)
    for _ in range(10):
        phi = rng.uniform(0.1, 0.45)
        ic = critical_current(params, phi)
        wp = solve_working_point(params, rng.uniform(0, 0.85) * ic, phi)
        lr = linearized_response(params, wp, R_KOHM, 0.0)
        assert lr.real == pytest.approx(re_transfer_function(params, wp), rel=1e-9)


def test_imaginary_part_vanishes_at_zero_bias(qp, params):
    wp = solve_working_point(params, 0.0, 0.45)
    for f in (0.1, 1.0, 5.0):
        lr = linearized_response(params, wp, R_KOHM, 2 * math.pi * f)
        assert lr.imag == 0.0
    assert ohmic_alpha(qp, params, wp, R_KOHM) == 0.0


def test_imaginary_part_linear_in_omega(params, wp_decoupling):
    om = 2 * math.pi * 0.05
    im1 = linearized_response(params, wp_decoupling, R_KOHM, om).imag
    im2 = linearized_response(params, wp_decoupling, R_KOHM, 2 * om).imag
    assert im2 / im1 == pytest.approx(2.0, rel=1e-3)
    # slope tracks the closed form up to the loop-feedback enhancement
    assert im1 / closed_form_im(params, wp_decoupling, om) == pytest.approx(1.0, abs=0.12)


def test_dissipative_sign_coherence(params, wp_decoupling):
    # Both routes give a non-negative imaginary part, i.e. a positive
    # dynamic resistance in the dJ/dPhi_s = 1/L + i omega / R convention.
    for f in (0.1, 0.5, 1.0, 3.0):
        om = 2 * math.pi * f
        im = linearized_response(params, wp_decoupling, R_KOHM, om).imag
        assert im >= 0.0
        assert im * closed_form_im(params, wp_decoupling, om) >= 0.0
        assert dynamic_resistance_ohm(params, wp_decoupling, R_KOHM, om) > 0.0


def test_alpha_paper_value(qp, params, wp_decoupling):
    alpha = ohmic_alpha(qp, params, wp_decoupling, R_KOHM)
    assert alpha == pytest.approx(8e-5, rel=0.2)


def test_alpha_scales_inversely_with_resistance(qp, params, wp_decoupling):
    alpha = ohmic_alpha(qp, params, wp_decoupling, R_KOHM)
    assert ohmic_alpha(qp, params, wp_decoupling, R_KOHM / 2) == pytest.approx(
        2 * alpha, rel=1e-12
    )


def test_alpha_monotone_in_bias(qp, params):
    ic = critical_current(params, 0.45)
    alphas = [
        ohmic_alpha(qp, params, solve_working_point(params, r * ic, 0.45), R_KOHM)
        for r in np.linspace(0.0, 0.85, 50)
    ]
    assert all(b >= a for a, b in zip(alphas, alphas[1:]))


def test_spectral_density_ohmic_form(qp, params, wp_decoupling):
    assert spectral_density(qp, params, wp_decoupling, R_KOHM, 0.0) == 0.0
    om = 2 * math.pi * 0.4
    j1 = spectral_density(qp, params, wp_decoupling, R_KOHM, om)
    j2 = spectral_density(qp, params, wp_decoupling, R_KOHM, 2 * om)
    assert j2 / j1 == pytest.approx(2.0, rel=1e-3)


def test_spectral_density_tracks_alpha(qp, params, wp_decoupling):
    # J(omega)/2pi = alpha * f up to the loop-feedback factor
    # 1/(1 + L A / 2)^2, a 9-10% enhancement at this working point.
    alpha = ohmic_alpha(qp, params, wp_decoupling, R_KOHM)
    for f in (0.1, 0.5, 1.0):
        j = spectral_density(qp, params, wp_decoupling, R_KOHM, 2 * math.pi * f)
        assert j / (alpha * f) == pytest.approx(1.0, abs=0.12)


def test_dephasing_estimate_range_and_scalings(qp, params, wp_decoupling):
    alpha = ohmic_alpha(qp, params, wp_decoupling, R_KOHM)
    tau = dephasing_estimate(alpha, 0.05)
    assert 200.0 <= tau <= 1000.0
    assert dephasing_estimate(alpha, 0.10) == pytest.approx(tau / 2, rel=1e-12)
    assert dephasing_estimate(alpha / 2, 0.05) == pytest.approx(2 * tau, rel=1e-12)
    for temp in (0.03, 0.06):
        assert 100.0 <= dephasing_estimate(alpha, temp) <= 2000.0


def test_dephasing_alpha_zero_raises():
    with pytest.raises(InfiniteLifetime):
        dephasing_estimate(0.0, 0.05)


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(R_kohm=-1.0)
    with pytest.raises(ValueError):
        NoiseSpec(R_kohm=2.4, temperature_K=0.05, alpha=-1e-5)
