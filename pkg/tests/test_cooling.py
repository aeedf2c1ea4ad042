import math

import numpy as np
import pytest

from ladder_cooling import (LaserDrive, Scheme, analytics, build_generator, cooling,
                            doppler_shift, effective_wavevector, mhz, preset, steady_state)
from ladder_cooling.model import CA_DIPOLE_GAMMA, HBAR, KB, E
from ladder_cooling.optimize import OptimumAtBoundary

DST = mhz(-200)


def optimal_drive(atom, omega_w_mhz, dst=DST, relative=-0.5):
    ow = mhz(omega_w_mhz)
    d = LaserDrive(ow, analytics.optimal_ratio(atom, ow, dst).omega_st, 0.0, dst)
    return d.with_(delta_w=analytics.light_shift(d) + relative * analytics.gamma_eff(atom, d))


def test_force_vanishes_without_weak_coupling(ca):
    d = LaserDrive(mhz(1e-3), mhz(100), mhz(-12), DST)
    scale = HBAR * effective_wavevector(ca) * ca.gamma
    for v in (-5.0, 0.0, 0.3, 10.0):
        assert abs(cooling.force(ca, d, v=v)) < 1e-6 * scale


def test_force_is_momentum_times_scattering_rate(ca):
    d = optimal_drive(ca, 1.0)
    for v in (0.0, 0.2, -1.0):
        pop, coh, p_e = cooling.force_forms(ca, d, v=v)
        assert pop == HBAR * ca.gamma * p_e * (ca.k_w + ca.k_st_magnitude)
        assert coh == pytest.approx(pop, rel=1e-8)


def test_force_at_velocity_is_force_of_shifted_drive(ca):
    d = optimal_drive(ca, 0.5)
    shifted = doppler_shift(d, ca, 0.7)
    assert cooling.force(ca, d, v=0.7) == pytest.approx(cooling.force(ca, shifted), rel=1e-12)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_force_forms_agree_random(scheme):
    rng = np.random.default_rng(7)
    atom = preset("ba-0.75")
    g = atom.gamma
    for _ in range(50):
        d = LaserDrive(rng.uniform(0.05, 2) * g, rng.uniform(0.1, 5) * g,
                       rng.uniform(-3, 3) * g, rng.uniform(-10, 3) * g, bool(rng.integers(2)))
        pop, coh, _ = cooling.force_forms(atom, d, scheme, rng.uniform(-20, 20))
        assert coh == pytest.approx(pop, rel=1e-8, abs=1e-14 * HBAR * atom.k_w * g)


def test_force_identity_error_raised(ca, monkeypatch):
    monkeypatch.setattr(cooling, "force_forms", lambda *a, **k: (1.0, 1.1, 0.1))
    with pytest.raises(cooling.ForceIdentityError):
        cooling.force(ca, optimal_drive(ca, 1.0))


def test_red_detuning_damps_random(ca):
    rng = np.random.default_rng(11)
    for _ in range(100):
        ow = mhz(rng.uniform(0.05, 1.0))
        dst = -mhz(rng.uniform(50, 800))
        ost = rng.uniform(0.05, 2.0) * abs(dst)
        d = LaserDrive(ow, ost, 0.0, dst)
        width = analytics.gamma_eff(ca, d)
        d = d.with_(delta_w=analytics.light_shift(d) - rng.uniform(0.1, 2.0) * width)
        assert cooling.damping(ca, d) > 0


def test_damping_step_and_richardson(ca):
    d = optimal_drive(ca, 0.5)
    est = cooling.damping_estimate(ca, d)
    assert est.step == pytest.approx(0.01 * analytics.gamma_eff(ca, d) / effective_wavevector(ca))
    assert est.step_converged
    # Richardson estimate against a much finer plain central difference
    h = est.step / 50
    fine = -(cooling.force(ca, d, v=h) - cooling.force(ca, d, v=-h)) / (2 * h)
    assert est.beta == pytest.approx(fine, rel=1e-4)


def test_richardson_exact_for_cubic():
    beta, ok = cooling._damping_from_force(lambda v: -3.0 * v + 2.0 * v ** 3, 0.1)
    assert beta == pytest.approx(3.0, rel=1e-12) and ok


def test_analytic_damping_in_validity_regime(ca):
    d = LaserDrive(mhz(0.02), mhz(40), 0.0, DST)
    d = d.with_(delta_w=analytics.light_shift(d) - 0.5 * analytics.gamma_eff(ca, d))
    est = cooling.damping_estimate(ca, d)
    assert est.analytic_valid
    assert est.beta_analytic == pytest.approx(est.beta, rel=0.10)


def test_analytic_damping_flag_off_outside_regime(ca):
    assert not cooling.damping_estimate(ca, optimal_drive(ca, 5.0)).analytic_valid
    assert not cooling.damping_estimate(preset("ba-0.75"), optimal_drive(ca, 0.02)).analytic_valid


def test_damping_curve_maxima_close(ca):
    maxima = []
    for ow in (0.1, 0.5, 1.0):
        d = optimal_drive(ca, ow, relative=0.0)
        width = analytics.gamma_eff(ca, d)
        curve = cooling.damping_curve(ca, d, np.linspace(-3, -0.02, 150) * width)
        beta = curve.columns["beta"]
        k = int(np.argmax(beta))
        assert 0 < k < beta.size - 1
        # unimodal: rises to the maximum, then falls
        assert np.all(np.diff(beta[:k + 1]) > 0) and np.all(np.diff(beta[k:]) < 0)
        maxima.append(beta.max())
    assert (max(maxima) - min(maxima)) / max(maxima) < 0.10
    assert curve.column_units["beta"] == "hbar k^2"


def test_diffusion_proportional_to_population(ca):
    d = LaserDrive(mhz(0.01), mhz(60), 0.0, DST)
    d = d.with_(delta_w=analytics.light_shift(d))
    p1 = steady_state(build_generator(ca, d))[E, E].real
    D1 = cooling.diffusion(ca, d)
    d2 = d.with_(omega_w=d.omega_w * math.sqrt(2))
    p2 = steady_state(build_generator(ca, d2))[E, E].real
    assert cooling.diffusion(ca, d2) / D1 == pytest.approx(p2 / p1, rel=1e-12)
    assert p2 / p1 == pytest.approx(2.0, rel=1e-2)
    tiny = d.with_(omega_w=mhz(1e-6))
    assert cooling.diffusion(ca, tiny) < 1e-7 * D1


def test_counterpropagating_diffusion_ratio(ca):
    d = optimal_drive(ca, 0.5)
    ratio = cooling.diffusion(ca, d.with_(st_copropagates=False)) / cooling.diffusion(ca, d)
    assert ratio == pytest.approx(1 / 141.6, rel=0.01)


def test_temperature_identity(ca):
    rep = cooling.doppler_temperature(ca, optimal_drive(ca, 0.5))
    assert rep.temperature == pytest.approx(rep.diffusion / (KB * rep.beta_damp), rel=1e-12)
    assert rep.temperature > 0 and rep.diffusion >= 0
    assert rep.temperature_reduced == pytest.approx(KB * rep.temperature / (HBAR * ca.gamma))
    assert rep.recoil_below_linewidth
    assert rep.sidebands_unresolved is None
    assert set(rep.to_dict()) >= {"force_zero", "beta_damp", "diffusion", "temperature"}


def test_sideband_flag(ca):
    d = optimal_drive(ca, 0.5)
    width = analytics.gamma_eff(ca, d)
    assert cooling.doppler_temperature(ca, d, trap_frequency=0.1 * width).sidebands_unresolved
    assert not cooling.doppler_temperature(ca, d, trap_frequency=10 * width).sidebands_unresolved


def test_blue_detuning_not_cooling(ca):
    with pytest.raises(cooling.NotCooling):
        cooling.doppler_temperature(ca, optimal_drive(ca, 0.5, relative=+0.5))


def test_two_level_reference():
    assert cooling.two_level_doppler_limit(CA_DIPOLE_GAMMA) == pytest.approx(0.55e-3, rel=0.10)


def test_minimum_temperature_at_half_linewidth(ca):
    d = optimal_drive(ca, 0.5, relative=0.0)
    width = analytics.gamma_eff(ca, d)
    rel = np.arange(-1.5, -0.049, 0.05)
    temps = [cooling.doppler_temperature(ca, d.with_(delta_w=d.delta_w + x * width)).temperature
             for x in rel]
    assert rel[int(np.argmin(temps))] == pytest.approx(-0.5, abs=0.051)
    assert cooling.cooling_detuning(ca, d) == pytest.approx(d.delta_w - width / 2)


def test_min_temperature_curve(ca):
    ratios = np.geomspace(0.05, 10, 15)
    low = cooling.min_temperature_curve(ca, mhz(0.1), ratios, DST)
    high = cooling.min_temperature_curve(ca, mhz(1.0), ratios, DST)
    t_low, t_high = low.columns["T_D"], high.columns["T_D"]
    assert low.column_units["T_D"] == "K"
    assert t_low[0] < 100e-6
    assert t_high.min() > t_low.min()
    # temperature grows with the ratio over the plotted range
    assert np.all(np.diff(t_low) > 0)
    # large ratio: gamma/2-linewidth two-level scale hbar (gamma/2) / (2 k_B)
    scale = HBAR * (ca.gamma / 2) / (2 * KB)
    assert scale / 3 < t_low[-1] < 3 * scale


def test_min_temperature_curve_depends_on_ratio_only(ca):
    ratios = np.geomspace(0.05, 10, 9)
    a = cooling.min_temperature_curve(ca, mhz(0.5), ratios, -10 * ca.gamma).columns["T_D"]
    b = cooling.min_temperature_curve(ca, mhz(0.5), ratios, -20 * ca.gamma).columns["T_D"]
    assert np.allclose(b, a, rtol=0.02)


def test_min_temperature_curve_rejects_bad_grid(ca):
    with pytest.raises(ValueError):
        cooling.min_temperature_curve(ca, mhz(0.1), [0.0, 1.0])


def test_effective_force_curve(ca):
    d = optimal_drive(ca, 1.0)
    keff = effective_wavevector(ca)
    v = np.linspace(0, 2, 81) * (ca.gamma / 2) / keff
    curve = cooling.effective_force_curve(ca, d, v)
    fbar = curve.columns["force_bar"]
    assert fbar[0] == 0.0
    assert np.all(fbar[1:] < 0)
    assert curve.unit == "gamma/2" and curve.column_units["force_bar"] == "hbar k gamma"
    beta = cooling.damping(ca, d)
    small = v[1] / 20
    slope = cooling.effective_force_curve(ca, d, [0.0, small]).columns["force_bar"][1]
    assert -slope * HBAR * keff * ca.gamma == pytest.approx(2 * beta * small, rel=0.05)
    with pytest.raises(ValueError):
        cooling.effective_force_curve(ca, d, [-1.0])


def test_capture_range_grows_with_linewidth(ca):
    keff = effective_wavevector(ca)
    grid = np.linspace(0, 1, 201) * (ca.gamma / 2) / keff
    ranges = []
    for ow, ost in ((0.1, 34.0), (1.0, 106.0)):
        d = LaserDrive(mhz(ow), mhz(ost), 0.0, DST)
        d = d.with_(delta_w=cooling.cooling_detuning(ca, d))
        ranges.append(cooling.capture_range(cooling.effective_force_curve(ca, d, grid)))
    assert ranges[1] > ranges[0] > 0


def test_optimize_drive_low_power(ca):
    d = cooling.optimize_drive(ca, mhz(0.1), DST)
    assert d.omega_st / mhz(1) == pytest.approx(34.0, rel=0.05)
    assert d.delta_w == pytest.approx(cooling.cooling_detuning(ca, d))
    eq = analytics.optimal_ratio(ca, mhz(0.1), DST).omega_st
    assert d.omega_st == pytest.approx(eq, rel=0.07)


def test_optimize_drive_doubling_scaling(ca):
    r1 = (cooling.optimize_drive(ca, mhz(0.1), DST).omega_st / abs(DST)) ** 2
    r2 = (cooling.optimize_drive(ca, mhz(0.2), DST).omega_st / abs(DST)) ** 2
    assert r2 / r1 == pytest.approx(2.0, rel=0.10)


def test_optimize_drive_preconditions(ca):
    with pytest.raises(ValueError):
        cooling.optimize_drive(ca, 0.0, DST)
    with pytest.raises(ValueError):
        cooling.optimize_drive(ca, mhz(0.1), -DST)
    with pytest.raises(OptimumAtBoundary):
        cooling.optimize_drive(ca, mhz(400), mhz(-20))
