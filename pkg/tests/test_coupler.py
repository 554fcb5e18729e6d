import math
from dataclasses import replace

import numpy as np
import pytest

from squidcoupler.coupler import (
    QubitPair,
    bias_shift,
    coupling_vs_bias,
    direct_coupling,
    find_decoupling_bias,
    max_ks_vs_beta,
    net_coupling,
    squid_coupling,
)
from squidcoupler.errors import NoSignChange
from squidcoupler.squid import critical_current, solve_working_point


def test_direct_coupling_paper_value(qp):
    assert direct_coupling(qp) == pytest.approx(-0.16, abs=0.005)


def test_direct_coupling_trivial_cases(qp):
    assert direct_coupling(replace(qp, Mqq_pH=0.0)) == 0.0
    doubled = replace(qp, Iq1_uA=2 * qp.Iq1_uA, Iq2_uA=2 * qp.Iq2_uA)
    assert direct_coupling(doubled) == pytest.approx(4.0 * direct_coupling(qp), rel=1e-12)


def test_squid_coupling_at_zero_bias(qp, params):
    wp = solve_working_point(params, 0.0, 0.45)
    ks = squid_coupling(qp, params, wp)
    assert ks == pytest.approx(-0.14, abs=0.01)
    assert direct_coupling(qp) + ks == pytest.approx(-0.30, abs=0.02)


def test_squid_coupling_trivial_cases(qp, params):
    wp = solve_working_point(params, 0.0, 0.45)
    assert squid_coupling(replace(qp, Mqs_pH=1e-30), params, wp) == pytest.approx(0.0, abs=1e-12)


def test_net_coupling_paper_values(qp, params):
    assert net_coupling(qp, params, 0.0, 0.45) == pytest.approx(-0.30, abs=0.02)
    ic = critical_current(params, 0.45)
    assert net_coupling(qp, params, 0.57 * ic, 0.45) == pytest.approx(0.0, abs=0.02)


def test_net_coupling_more_negative_than_direct_at_zero_bias(qp, params):
    assert net_coupling(qp, params, 0.0, 0.45) < direct_coupling(qp)


def test_coupling_vs_bias_endpoints_and_continuity(qp, params):
    rows = coupling_vs_bias(qp, params, 0.45, 100)
    assert rows[0].ib_ratio == 0.0
    assert rows[-1].ib_ratio == pytest.approx(0.95)
    assert rows[0].K_GHz == pytest.approx(-0.30, abs=0.02)
    # sign change inside (0, 0.85 Ic)
    inner = [r.K_GHz for r in rows if r.ib_ratio <= 0.85]
    assert min(inner) < 0.0 < max(inner)
    # grid refinement shrinks the largest jump
    jump100 = max(abs(b.K_GHz - a.K_GHz) for a, b in zip(rows, rows[1:]))
    rows200 = coupling_vs_bias(qp, params, 0.45, 200)
    jump200 = max(abs(b.K_GHz - a.K_GHz) for a, b in zip(rows200, rows200[1:]))
    assert jump200 < jump100


def test_coupling_vs_bias_requires_two_points(qp, params):
    with pytest.raises(ValueError):
        coupling_vs_bias(qp, params, 0.45, 1)


def test_decoupling_bias_paper_value(qp, params):
    ratio = find_decoupling_bias(qp, params, 0.45)
    assert ratio == pytest.approx(0.57, abs=0.02)
    ic = critical_current(params, 0.45)
    assert abs(net_coupling(qp, params, ratio * ic, 0.45)) < 1e-6


def test_decoupling_without_direct_coupling_is_transfer_zero(qp, params):
    bare = replace(qp, Mqq_pH=0.0)
    ratio = find_decoupling_bias(bare, params, 0.45)
    ic = critical_current(params, 0.45)
    wp = solve_working_point(params, ratio * ic, 0.45)
    assert math.tan(wp.delta_gamma) * math.tan(wp.gamma_bar) == pytest.approx(1.0, abs=1e-5)


def test_no_decoupling_at_zero_flux(qp, params):
    with pytest.raises(NoSignChange):
        find_decoupling_bias(qp, params, 0.0)


def test_ks_scales_with_mqs_squared(qp, params):
    wp = solve_working_point(params, 0.0, 0.45)
    base = squid_coupling(qp, params, wp)
    for scale in (2.0, 3.0, 5.0):
        scaled = squid_coupling(replace(qp, Mqs_pH=scale * qp.Mqs_pH), params, wp)
        assert scaled == pytest.approx(scale**2 * base, rel=1e-12)


def test_max_ks_vs_beta_has_interior_maximum(qp, params):
    grid = np.geomspace(0.01, 0.9, 30)
    rows = max_ks_vs_beta(qp, params, grid)
    ks = np.array([r.Ks_GHz for r in rows])
    assert np.all(np.isfinite(ks))
    assert np.max(ks) > 0.0  # bipolarity available
    i_max = int(np.nanargmax(ks))
    assert 0 < i_max < len(rows) - 1
    assert rows[i_max].beta_L == pytest.approx(0.09, abs=0.04)


def test_max_ks_vs_beta_small_limit_follows_smallbeta_scaling(qp, params):
    # At 0.85 Ic the tan^2 tan^2 factor is large, so the small-beta form
    # differs from the full one by O(beta_L) with a sizable prefactor; the
    # check is that the relative deviation shrinks proportionally to beta_L.
    from squidcoupler.constants import PH, UA, joule_to_ghz
    from squidcoupler.squid import re_transfer_smallbeta

    def rel_dev(beta):
        row = max_ks_vs_beta(qp, params, [beta])[0]
        p = replace(params, I0_uA=row.I0_uA)
        ic = critical_current(p, 0.45)
        wp = solve_working_point(p, 0.85 * ic, 0.45)
        small = joule_to_ghz(
            -2.0 * (qp.Mqs_pH * PH) ** 2 * qp.Iq1_uA * qp.Iq2_uA * UA * UA
            * re_transfer_smallbeta(p, wp)
        )
        return abs(row.Ks_GHz - small) / abs(small)

    assert rel_dev(0.01) / rel_dev(0.02) == pytest.approx(0.5, abs=0.1)
    assert rel_dev(0.01) < 0.15


def test_max_ks_single_point_grid(qp, params):
    rows = max_ks_vs_beta(qp, params, [0.0928])
    assert len(rows) == 1


def test_bias_shift_paper_value(qp, params):
    ic = critical_current(params, 0.45)
    ratio = find_decoupling_bias(qp, params, 0.45)
    shift = bias_shift(qp, params, ratio * ic, 0.45, 0.0)
    assert abs(shift) == pytest.approx(1.64, abs=0.10)
    assert shift < 0.0  # J decreases with bias


def test_bias_shift_trivial_cases(qp, params):
    assert bias_shift(qp, params, 0.1, 0.45, 0.1) == 0.0
    ic = critical_current(params, 0.45)
    base = bias_shift(qp, params, 0.5 * ic, 0.45, 0.0)
    doubled = bias_shift(replace(qp, Mqs_pH=2 * qp.Mqs_pH), params, 0.5 * ic, 0.45, 0.0)
    assert doubled == pytest.approx(2.0 * base, rel=1e-12)


def test_qubit_pair_validation():
    with pytest.raises(ValueError):
        QubitPair(Iq1_uA=0.0, Iq2_uA=0.46, delta1_GHz=5.0, delta2_GHz=3.0,
                  eps1_GHz=8.0, eps2_GHz=2.0, Mqs_pH=33.0, Mqq_pH=0.25)
    with pytest.raises(ValueError):
        QubitPair(Iq1_uA=0.46, Iq2_uA=0.46, delta1_GHz=5.0, delta2_GHz=3.0,
                  eps1_GHz=8.0, eps2_GHz=2.0, Mqs_pH=33.0, Mqq_pH=-0.1)
