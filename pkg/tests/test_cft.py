import math

import numpy as np
import pytest
from scipy import integrate

from lxesim.cft import (
    CftParams,
    FitResult,
    ObcModel,
    PbcModel,
    cardy_chi_obc,
    cardy_eta,
    cardy_prefactor,
    chi_obc_small_r,
    chi_pbc,
    fit_scale,
    sc_map_w,
    solve_aspect_y,
    _crossing_of_eta,
    _solve_aspect_m,
)
from lxesim.percolation import crossing_probability_mc
from lxesim.special import ellipk, ellipk_complement


def test_params_validation():
    with pytest.raises(ValueError):
        CftParams(aspect=-1.0)
    with pytest.raises(ValueError):
        CftParams(aspect=1.0, r_over_L=0.0)
    CftParams(aspect=1.0, r_over_L=0.5, time_scale=1.7, amplitude=0.9)


def test_solve_aspect_square_symmetry():
    """T/L = 0.5 forces K(m) = K(1-m), hence m = 1/2 and y = sqrt(2)."""
    assert solve_aspect_y(0.5) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_solve_aspect_limits():
    assert solve_aspect_y(5.0) > 10.0
    with pytest.raises(ValueError):
        solve_aspect_y(-1.0)


def test_solve_aspect_round_trip():
    for i in range(21):
        aspect = 0.1 * 100.0 ** (i / 20.0)
        m = _solve_aspect_m(aspect)
        resid = abs(1.0 / aspect - 2.0 * ellipk(m) / ellipk_complement(m))
        assert resid <= 1e-10


def test_sc_map_endpoints_and_monotonicity():
    y = math.sqrt(2)
    assert sc_map_w(0.0, y, 2.0) == 0.0
    assert sc_map_w(1.0, y, 2.0) == pytest.approx(1.0, abs=1e-9)
    zs = np.linspace(0.0, 1.0, 1001)
    vals = [sc_map_w(float(z), y) for z in zs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_sc_map_against_independent_quadrature():
    """Second scheme: direct quadrature in t without the sine substitution."""
    y = math.sqrt(2)
    val, _ = integrate.quad(
        lambda t: 1.0 / math.sqrt((1 - t * t) * (1 - t * t / (y * y))),
        0.0, 0.5, epsabs=1e-13, epsrel=1e-13,
    )
    expect = 2.0 / (2.0 * ellipk(0.5)) * val
    assert sc_map_w(0.5, y, 2.0) == pytest.approx(expect, abs=1e-9)


def test_sc_map_domain():
    with pytest.raises(ValueError):
        sc_map_w(1.5, 2.0)
    with pytest.raises(ValueError):
        sc_map_w(0.5, 0.9)


def test_cardy_eta_full_width():
    eta = cardy_eta(0.5, 1.0)
    expect = ((math.sqrt(2) - 1) / (math.sqrt(2) + 1)) ** 2
    assert eta == pytest.approx(expect, abs=1e-12)


def test_cardy_value_regressions():
    # pinned values of the crossing formula at r/L = 1 (40-digit oracle)
    assert cardy_chi_obc(0.5, 1.0) == pytest.approx(0.8243531061993448, abs=1e-9)
    assert cardy_chi_obc(1.0, 1.0) == pytest.approx(0.5, abs=1e-9)
    assert cardy_chi_obc(2.0, 1.0) == pytest.approx(0.1756468938006552, abs=1e-9)
    # limits
    assert cardy_chi_obc(0.05, 1.0) > 0.999
    assert cardy_chi_obc(20.0, 1.0) < 1e-6
    # monotone decreasing in aspect
    grid = [cardy_chi_obc(a, 1.0) for a in np.linspace(0.2, 4.0, 16)]
    assert all(a > b for a, b in zip(grid, grid[1:]))


def test_cardy_duality_on_grid():
    """C(eta) + C(1-eta) = 1 to 1e-9 on a 99-point grid; implies C(1/2)=1/2."""
    for eta in np.linspace(0.01, 0.99, 99):
        s = _crossing_of_eta(float(eta)) + _crossing_of_eta(1.0 - float(eta))
        assert abs(s - 1.0) < 1e-9
    assert _crossing_of_eta(0.5) == pytest.approx(0.5, abs=1e-12)


def test_cardy_aspect_inversion_duality():
    for a in (0.25, 0.5, 2.0, 3.0):
        s = cardy_chi_obc(a, 1.0) + cardy_chi_obc(1.0 / a, 1.0)
        assert abs(s - 1.0) < 1e-9


def test_cardy_against_percolation_mc():
    """The crossing formula matches direct critical bond sampling."""
    mean, err = crossing_probability_mc(64, 32, 0.5, 64, "open", 4000, seed=3)
    assert abs(mean - cardy_chi_obc(0.5, 1.0)) < 3 * err + 0.015


def test_small_r_power_law_is_exact():
    a = chi_obc_small_r(1.0, 0.2)
    b = chi_obc_small_r(1.0, 0.1)
    assert b / a == pytest.approx(0.5 ** (1.0 / 3.0), rel=1e-12)


def test_small_r_converges_to_full_formula():
    full = cardy_chi_obc(1.0, 1 / 64)
    small = chi_obc_small_r(1.0, 1 / 64)
    assert abs(small / full - 1.0) <= 0.05
    full = cardy_chi_obc(1.0, 1 / 256)
    small = chi_obc_small_r(1.0, 1 / 256)
    assert abs(small / full - 1.0) <= 0.02


def test_chi_pbc_values():
    assert chi_pbc(1.0, 1.0) == pytest.approx(0.5199050630091494, abs=1e-12)
    assert chi_pbc(2.0, 0.0) == 0.0
    grid = [chi_pbc(a, 1.0) for a in np.linspace(0.2, 4.0, 16)]
    assert all(a > b for a, b in zip(grid, grid[1:]))


def test_chi_pbc_log_slope_is_exact():
    for a1, a2 in ((0.3, 0.9), (0.5, 2.5), (1.0, 4.0)):
        u1 = math.log(2 * math.cosh(2 * math.pi * a1) - 2)
        u2 = math.log(2 * math.cosh(2 * math.pi * a2) - 2)
        slope = (math.log(chi_pbc(a2, 1.0)) - math.log(chi_pbc(a1, 1.0))) / (u2 - u1)
        assert abs(slope + 5.0 / 48.0) < 1e-12


def test_fit_scale_recovers_synthetic_obc():
    pts = [(a, cardy_chi_obc(1.7 * a, 1.0), 0.0) for a in (0.25, 0.5, 1.0, 2.0, 4.0)]
    fit = fit_scale(pts, ObcModel(1.0))
    assert isinstance(fit, FitResult)
    assert fit.time_scale == pytest.approx(1.7, abs=1e-6)
    assert fit.rms_residual < 1e-7


def test_fit_scale_recovers_synthetic_pbc_amplitude():
    pts = [(a, chi_pbc(1.3 * a, 0.9), 0.0) for a in (0.25, 0.5, 1.0, 2.0)]
    fit = fit_scale(pts, PbcModel(1.3))
    assert fit.amplitude == pytest.approx(0.9, abs=1e-6)
    assert fit.rms_residual < 1e-12


def test_fit_scale_degenerate_inputs():
    with pytest.raises(ValueError):
        fit_scale([(1.0, 0.5, 0.0)], ObcModel(1.0))
    with pytest.raises(TypeError):
        fit_scale([(a, 0.5, 0.0) for a in (0.5, 1.0, 2.0)], "nope")


def test_cardy_prefactor_times_gauss_limit_is_one():
    from lxesim.special import gamma

    limit = gamma(4 / 3) * gamma(1 / 3) / gamma(2 / 3)
    assert cardy_prefactor() * limit == pytest.approx(1.0, abs=1e-12)
