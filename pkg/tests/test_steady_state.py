import math

import numpy as np
import pytest

from ladder_cooling import (DegenerateSteadyState, LaserDrive, ScanResult, analytics,
                            build_generator, evolve, mhz, peak_and_fwhm, preset, scan_delta_st,
                            scan_delta_w, steady_state)
from ladder_cooling.model import E, G, M, pure_state
from ladder_cooling.steady_state import (HalfMaxNotBracketed, PeakNotBracketed, StepTooLarge,
                                         default_delta_w_grid, populations, stable_step)


def fig2_drive(dst_mhz=-100.0):
    d = LaserDrive(mhz(1), mhz(100), 0.0, mhz(dst_mhz))
    return d.with_(delta_w=analytics.light_shift(d))


def test_steady_state_matches_closed_form(ca):
    d = fig2_drive()
    rho = steady_state(build_generator(ca, d))
    assert rho[E, E].real == pytest.approx(analytics.pe_exact(ca, d), rel=1e-10)
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(rho, rho.conj().T, atol=1e-14)


def test_fig3_maximum_close_to_two_percent(ca):
    res = scan_delta_st(ca, LaserDrive(mhz(1), mhz(100), 0.0, mhz(-200)),
                        grid=mhz(1) * np.linspace(-600, -20, 291))
    assert 0.015 < res.columns["p_e"].max() < 0.025


def test_evolve_matches_steady_state(ca):
    d = LaserDrive(0.8 * ca.gamma, 1.3 * ca.gamma, 0.4 * ca.gamma, -0.9 * ca.gamma)
    gen = build_generator(ca, d)
    rho = evolve(gen, pure_state(G), 200 / ca.gamma)
    assert np.max(np.abs(rho - steady_state(gen))) < 1e-8


def test_evolve_pure_decay():
    atom = preset("ba-0.75")
    gen = build_generator(atom, LaserDrive(0, 0, 0, 0))
    rho = evolve(gen, pure_state(E), 1 / atom.gamma)
    assert rho[E, E].real == pytest.approx(math.exp(-1), abs=1e-6)
    assert rho[G, G].real == pytest.approx(0.75 * (1 - math.exp(-1)), abs=1e-6)
    assert rho[M, M].real == pytest.approx(0.25 * (1 - math.exp(-1)), abs=1e-6)


def test_evolve_zero_time_identity(ca):
    rho0 = pure_state(M)
    out = evolve(build_generator(ca, fig2_drive()), rho0, 0.0)
    assert np.array_equal(out, rho0)


def test_evolve_rejects_unstable_step(ca):
    gen = build_generator(ca, fig2_drive())
    with pytest.raises(StepTooLarge):
        evolve(gen, pure_state(G), 1e-6, dt=100 * stable_step(gen))


def test_degenerate_steady_state(ca):
    # lasers off with no |e> -> |m> decay: |g> and |m> are both stationary
    with pytest.raises(DegenerateSteadyState):
        steady_state(build_generator(ca, LaserDrive(0, 0, 0, 0)))


def test_degeneracy_names_grid_point(ca):
    with pytest.raises(DegenerateSteadyState, match="grid point 0"):
        scan_delta_w(ca, LaserDrive(0, 0, 0, 0), grid=[0.0, 1.0])


def test_populations_are_clipped():
    rho = np.diag([1.0 + 1e-14, -1e-14, 0.0]).astype(complex)
    p = populations(rho)
    assert np.all(p >= 0) and np.all(p <= 1)


@pytest.mark.parametrize("dst", [-100.0, -200.0, -400.0])
def test_pm_peak_at_light_shift(ca, dst):
    d = fig2_drive(dst)
    grid = mhz(1) * np.linspace(-40, 5, 901)
    res = scan_delta_w(ca, d, grid=grid)
    step = grid[1] - grid[0]
    peak = grid[np.argmax(res.columns["p_m"])]
    assert abs(peak - analytics.corrected_resonance(ca, d)) <= step
    assert abs(peak - analytics.light_shift(d)) <= analytics.gamma_eff(ca, d) / 10


def test_weak_limit_no_excitation(ca):
    d = LaserDrive(mhz(1e-3), mhz(100), 0.0, mhz(-200))
    res = scan_delta_w(ca, d)
    assert res.columns["p_e"].max() <= 1e-4


def test_smaller_branching_raises_peak(ca):
    for dst in (-100.0, -200.0, -400.0):
        d = fig2_drive(dst)
        grid = mhz(1) * np.linspace(-40, 5, 451)
        p1 = scan_delta_w(ca, d, grid=grid).columns["p_e"].max()
        p075 = scan_delta_w(ca.with_(beta_eg=0.75), d, grid=grid).columns["p_e"].max()
        assert p075 >= p1


def test_default_grid_centered(ca):
    d = fig2_drive(-200)
    grid = default_delta_w_grid(ca, d)
    assert grid.size == 801
    assert grid[400] == pytest.approx(analytics.light_shift(d))


def test_fixed_snapshot_recorded(ca):
    res = scan_delta_w(ca, fig2_drive(-200), grid=[0.0, 1.0])
    assert res.fixed["omega_st_mhz"] == pytest.approx(100)
    assert res.fixed["mass_u"] == pytest.approx(40)
    assert "delta_w_mhz" not in res.fixed


def test_fwhm_low_saturation_matches_gamma_eff(ca):
    d = LaserDrive(mhz(0.1), mhz(40), 0.0, mhz(-200))
    summary = peak_and_fwhm(scan_delta_w(ca, d), "p_e")
    width = analytics.gamma_eff(ca, d)
    assert summary.fwhm == pytest.approx(width, rel=0.10)
    assert summary.left_half_crossing < summary.peak_abscissa < summary.right_half_crossing


@pytest.mark.parametrize("ratio", [0.1, 0.3, 0.5])
def test_fig4_fwhm_within_5_percent(ca, ratio):
    dst = mhz(-200)
    d = LaserDrive(mhz(0.1), ratio * abs(dst), 0.0, dst)
    fwhm = peak_and_fwhm(scan_delta_w(ca, d), "p_e").fwhm
    assert fwhm == pytest.approx(analytics.gamma_eff(ca, d), rel=0.05)


@pytest.mark.parametrize("ratio", [1.0, 3.0, 10.0])
def test_strong_weak_drive_formula_overestimates(ca, ratio):
    dst = mhz(-200)
    d = LaserDrive(mhz(5), ratio * abs(dst), 0.0, dst)
    assert peak_and_fwhm(scan_delta_w(ca, d), "p_e").fwhm < analytics.gamma_eff(ca, d)


def test_synthetic_lorentzian_width():
    x = np.linspace(-10, 10, 2001)
    width = 1.7
    y = 1 / (1 + (2 * (x - 0.3) / width) ** 2)
    res = ScanResult("x", "", x, {"y": y})
    s = peak_and_fwhm(res, "y")
    assert s.fwhm == pytest.approx(width, rel=1e-3)
    assert s.peak_abscissa == pytest.approx(0.3, abs=1e-3)


def test_lorentzian_with_evaluator_is_exact():
    width = 1.7

    def f(x):
        return {"y": 1 / (1 + (2 * x / width) ** 2)}

    x = np.linspace(-10, 10, 41)
    res = ScanResult("x", "", x, {"y": np.array([f(v)["y"] for v in x])}, evaluate=f)
    assert peak_and_fwhm(res, "y").fwhm == pytest.approx(width, rel=1e-4)


def test_peak_at_edge_not_bracketed():
    x = np.linspace(0, 1, 11)
    with pytest.raises(PeakNotBracketed):
        peak_and_fwhm(ScanResult("x", "", x, {"y": x}), "y")


def test_half_max_not_bracketed():
    x = np.linspace(-1, 1, 21)
    with pytest.raises(HalfMaxNotBracketed):
        peak_and_fwhm(ScanResult("x", "", x, {"y": 2 - x ** 2}), "y")


def test_gridded_scan_values_match_evaluator(ca):
    res = scan_delta_w(ca, fig2_drive(-200), grid=mhz(1) * np.linspace(-20, 0, 5))
    x = res.abscissa[2]
    assert res.evaluate(x)["p_e"] == pytest.approx(res.columns["p_e"][2], rel=1e-12)
