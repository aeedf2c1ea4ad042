"""Doppler-cooling observables of the two-step excitation: radiative force,
damping, momentum diffusion and limit temperature, plus the curves behind
the damping, temperature and capture-range figures.

Everything is one-dimensional: both beams lie along one axis, velocities
are signed along the weak-laser wavevector.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import analytics
from .model import (E, G, HBAR, KB, M, AtomSpec, LaserDrive, Scheme, build_generator,
                    doppler_shift, effective_wavevector, k_st)
from .optimize import OptimumAtBoundary, golden_section_max
from .results import ScanResult
from .steady_state import _fixed_snapshot, steady_state

__all__ = [
    "CoolingReport", "DampingEstimate", "ForceIdentityError", "NotCooling",
    "OptimumAtBoundary", "capture_range", "cooling_detuning", "damping", "damping_curve",
    "damping_estimate", "diffusion", "doppler_temperature", "effective_force_curve",
    "force", "force_forms", "min_temperature_curve", "optimize_drive",
    "two_level_doppler_limit",
]

FORCE_RTOL = 1e-8
# Absolute slack for the force identity, as a fraction of hbar*k*gamma:
# populations carry ~1e-16 rounding regardless of how small they are.
FORCE_ATOL_SCALE = 1e-14
STEP_HALVING_RTOL = 1e-3


class NotCooling(ValueError):
    """The damping coefficient is not positive: the drive heats."""


class ForceIdentityError(ArithmeticError):
    """Population and coherence forms of the force disagree."""


def _k_scale(atom: AtomSpec, drive: LaserDrive) -> float:
    k = abs(effective_wavevector(atom, drive.st_copropagates))
    return k if k > 0 else atom.k_w


def force_forms(atom: AtomSpec, drive: LaserDrive, scheme: Scheme | str = Scheme.LADDER,
                v: float = 0.0) -> tuple[float, float, float]:
    """Return ``(population_form, coherence_form, p_e)`` of the force at velocity ``v``.

    Population form: photon momentum per absorbed photon times the flux
    through each laser.  Coherence form: hbar k Omega Im(rho) summed over
    both couplings.
    """
    scheme = Scheme.parse(scheme)
    shifted = doppler_shift(drive, atom, v)
    rho = steady_state(build_generator(atom, shifted, scheme))
    p_e = rho[E, E].real
    kw, ks = atom.k_w, k_st(atom, drive.st_copropagates)
    if scheme is Scheme.LADDER:
        pop = HBAR * atom.gamma * p_e * (kw * atom.beta_eg + ks)
        coh = HBAR * (kw * drive.omega_w * rho[G, M].imag + ks * drive.omega_st * rho[M, E].imag)
    else:
        pop = HBAR * atom.gamma * p_e * (kw * atom.beta_eg + ks * atom.beta_em)
        coh = HBAR * (kw * drive.omega_w * rho[G, E].imag + ks * drive.omega_st * rho[M, E].imag)
    return pop, coh, p_e


def force(atom: AtomSpec, drive: LaserDrive, scheme: Scheme | str = Scheme.LADDER,
          v: float = 0.0) -> float:
    """Radiative force (N) on an atom moving at ``v`` (m/s).

    Both forms of the force are evaluated and must agree to 1e-8 relative;
    otherwise :class:`ForceIdentityError` is raised.
    """
    pop, coh, _ = force_forms(atom, drive, scheme, v)
    atol = FORCE_ATOL_SCALE * HBAR * _k_scale(atom, drive) * atom.gamma
    if abs(pop - coh) > FORCE_RTOL * max(abs(pop), abs(coh)) + atol:
        raise ForceIdentityError(f"force forms disagree: {pop!r} vs {coh!r}")
    return pop


@dataclass(frozen=True)
class DampingEstimate:
    beta: float
    beta_analytic: float
    analytic_valid: bool
    step: float
    step_converged: bool


def _damping_from_force(force_of_v: Callable[[float], float], h: float) -> tuple[float, bool]:
    """-dF/dv at 0 by central differences with one Richardson level.

    Also reports whether halving ``h`` moves the estimate by < 0.1%.
    """
    def central(step: float) -> float:
        return (force_of_v(step) - force_of_v(-step)) / (2 * step)

    d1, d2, d4 = central(h), central(h / 2), central(h / 4)
    beta_h = -(4 * d2 - d1) / 3
    beta_h2 = -(4 * d4 - d2) / 3
    converged = abs(beta_h - beta_h2) <= STEP_HALVING_RTOL * abs(beta_h2)
    return beta_h2, converged


def beta_analytic(atom: AtomSpec, drive: LaserDrive) -> float:
    """Leading-order damping for a weak coupling Omega_w much below all other rates."""
    kw, ks = atom.k_w, k_st(atom, drive.st_copropagates)
    keff = kw + ks
    g = atom.gamma
    ow, ost, dw, dst = drive.omega_w, drive.omega_st, drive.delta_w, drive.delta_st
    p0 = analytics.pe_exact(atom, drive)
    slope = (8 * g ** 2 * dw * kw
             + 8 * (4 * dw * (dst + dw) - ost ** 2) * (dw * (ks + kw) + (dst + dw) * kw))
    return -HBAR * keff ** 2 * g * p0 ** 2 * slope / (ost ** 2 * ow ** 2 * keff)


def _analytic_beta_valid(atom: AtomSpec, drive: LaserDrive) -> bool:
    others = (drive.omega_st ** 2, drive.delta_st ** 2, atom.gamma ** 2, drive.delta_w ** 2)
    return atom.beta_eg == 1.0 and all(
        drive.omega_w ** 2 * analytics.REGIME_FACTOR <= x for x in others)


def damping_estimate(atom: AtomSpec, drive: LaserDrive,
                     scheme: Scheme | str = Scheme.LADDER) -> DampingEstimate:
    h = 0.01 * analytics.gamma_eff(atom, drive) / _k_scale(atom, drive)
    beta, converged = _damping_from_force(lambda v: force(atom, drive, scheme, v), h)
    try:
        b_an = beta_analytic(atom, drive) if Scheme.parse(scheme) is Scheme.LADDER else math.nan
    except ZeroDivisionError:
        b_an = math.nan
    valid = Scheme.parse(scheme) is Scheme.LADDER and _analytic_beta_valid(atom, drive)
    return DampingEstimate(beta, b_an, valid, h, converged)


def damping(atom: AtomSpec, drive: LaserDrive, scheme: Scheme | str = Scheme.LADDER) -> float:
    """Damping coefficient beta = -dF/dv at v = 0 (kg/s)."""
    return damping_estimate(atom, drive, scheme).beta


def diffusion(atom: AtomSpec, drive: LaserDrive, scheme: Scheme | str = Scheme.LADDER) -> float:
    """Momentum diffusion 0.5 hbar**2 k_eff**2 gamma p_e(0)."""
    keff = effective_wavevector(atom, drive.st_copropagates)
    p_e = steady_state(build_generator(atom, drive, scheme))[E, E].real
    return 0.5 * HBAR ** 2 * keff ** 2 * atom.gamma * p_e


def two_level_doppler_limit(gamma: float) -> float:
    """hbar gamma / (2 k_B) in kelvin."""
    return HBAR * gamma / (2 * KB)


@dataclass(frozen=True)
class CoolingReport:
    force_zero: float
    beta_damp: float
    diffusion: float
    temperature: float
    temperature_reduced: float  # k_B T / (hbar gamma)
    gamma_eff_used: float
    k_eff: float
    st_copropagates: bool
    beta_analytic: float
    beta_analytic_valid: bool
    step_converged: bool
    recoil_below_linewidth: bool
    sidebands_unresolved: bool | None

    def to_dict(self) -> dict:
        return asdict(self)


def doppler_temperature(atom: AtomSpec, drive: LaserDrive,
                        scheme: Scheme | str = Scheme.LADDER,
                        trap_frequency: float | None = None) -> CoolingReport:
    """Limit temperature D / (k_B beta) and the quantities behind it.

    ``trap_frequency`` (rad/s), when given, sets the unresolved-sideband
    flag.  Raises :class:`NotCooling` unless beta > 0.
    """
    est = damping_estimate(atom, drive, scheme)
    if not est.beta > 0:
        raise NotCooling(f"damping coefficient {est.beta:.6g} kg/s is not positive")
    d = diffusion(atom, drive, scheme)
    temperature = d / (KB * est.beta)
    width = analytics.gamma_eff(atom, drive)
    keff = effective_wavevector(atom, drive.st_copropagates)
    recoil = HBAR * keff ** 2 / (2 * atom.mass)
    return CoolingReport(
        force_zero=force(atom, drive, scheme, 0.0),
        beta_damp=est.beta,
        diffusion=d,
        temperature=temperature,
        temperature_reduced=KB * temperature / (HBAR * atom.gamma),
        gamma_eff_used=width,
        k_eff=keff,
        st_copropagates=drive.st_copropagates,
        beta_analytic=est.beta_analytic,
        beta_analytic_valid=est.analytic_valid,
        step_converged=est.step_converged,
        recoil_below_linewidth=recoil < width,
        sidebands_unresolved=None if trap_frequency is None else width > trap_frequency,
    )


def cooling_detuning(atom: AtomSpec, drive: LaserDrive) -> float:
    """Weak detuning of minimum temperature, delta_LS - Gamma_eff / 2."""
    return analytics.light_shift(drive) - analytics.gamma_eff(atom, drive) / 2


def damping_curve(atom: AtomSpec, drive: LaserDrive, relative_grid,
                  scheme: Scheme | str = Scheme.LADDER) -> ScanResult:
    """beta / (hbar k_eff**2) versus Delta_w - delta_LS (rad/s)."""
    grid = np.asarray(relative_grid, dtype=float)
    keff = _k_scale(atom, drive)
    shift = analytics.light_shift(drive)
    betas = np.array([damping(atom, drive.with_(delta_w=shift + x), scheme) for x in grid])
    fixed = _fixed_snapshot(atom, drive, Scheme.parse(scheme), light_shift_mhz=shift / (2e6 * math.pi))
    fixed.pop("delta_w_mhz")
    return ScanResult("delta_w_minus_light_shift", "rad/s", grid,
                      {"beta": betas / (HBAR * keff ** 2)}, fixed, {"beta": "hbar k^2"})


def min_temperature_curve(atom: AtomSpec, omega_w: float, ratio_grid,
                          delta_st: float | None = None, st_copropagates: bool = True,
                          scheme: Scheme | str = Scheme.LADDER) -> ScanResult:
    """Limit temperature versus |Omega_st / Delta_st| at delta_LS - Gamma_eff/2.

    ``delta_st`` defaults to -10 gamma.
    """
    grid = np.asarray(ratio_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("ratio grid must be positive")
    if delta_st is None:
        delta_st = -10 * atom.gamma
    temps, widths, betas = [], [], []
    for ratio in grid:
        d = LaserDrive(omega_w, ratio * abs(delta_st), 0.0, delta_st, st_copropagates)
        d = d.with_(delta_w=cooling_detuning(atom, d))
        rep = doppler_temperature(atom, d, scheme)
        temps.append(rep.temperature)
        widths.append(rep.gamma_eff_used / (atom.gamma / 2))
        betas.append(rep.beta_damp / (HBAR * rep.k_eff ** 2))
    fixed = _fixed_snapshot(atom, LaserDrive(omega_w, 0.0, 0.0, delta_st, st_copropagates),
                            Scheme.parse(scheme), delta_w_rule="light_shift - gamma_eff/2")
    for key in ("omega_st_mhz", "delta_w_mhz"):
        fixed.pop(key)
    return ScanResult("ratio", "|omega_st/delta_st|", grid,
                      {"T_D": np.array(temps), "gamma_eff": np.array(widths), "beta": np.array(betas)},
                      fixed, {"T_D": "K", "gamma_eff": "gamma/2", "beta": "hbar k^2"})


def effective_force_curve(atom: AtomSpec, drive: LaserDrive, vrms_grid,
                          scheme: Scheme | str = Scheme.LADDER) -> ScanResult:
    """F(v_rms) - F(-v_rms) in units of hbar k_eff gamma versus k_eff v_rms / (gamma/2).

    The drive is used as given; pass ``delta_w = cooling_detuning(...)``
    for the minimum-temperature setting.
    """
    v = np.asarray(vrms_grid, dtype=float)
    if np.any(v < 0):
        raise ValueError("v_rms grid must be >= 0")
    keff = _k_scale(atom, drive)
    unit = HBAR * keff * atom.gamma
    fbar = np.array([0.0 if x == 0 else force(atom, drive, scheme, x) - force(atom, drive, scheme, -x)
                     for x in v]) / unit
    fixed = _fixed_snapshot(atom, drive, Scheme.parse(scheme))
    return ScanResult("k_v_rms", "gamma/2", keff * v / (atom.gamma / 2),
                      {"force_bar": fbar, "v_rms": v}, fixed,
                      {"force_bar": "hbar k gamma", "v_rms": "m/s"})


def capture_range(curve: ScanResult) -> float:
    """Abscissa of the strongest effective force on a curve from :func:`effective_force_curve`."""
    return float(curve.abscissa[int(np.argmax(np.abs(curve.columns["force_bar"])))])


def optimize_drive(atom: AtomSpec, omega_w: float, delta_st: float,
                   st_copropagates: bool = True, rtol: float = 1e-4,
                   scheme: Scheme | str = Scheme.LADDER) -> LaserDrive:
    """Strong Rabi frequency maximizing p_e at Delta_w = delta_LS, then the cooling detuning.

    Golden-section search over log(Omega_st) in [1e-3, 1] |Delta_st|; the
    returned drive has Delta_w = delta_LS - Gamma_eff / 2.
    """
    if not omega_w > 0:
        raise ValueError("omega_w must be > 0")
    if not delta_st < 0:
        raise ValueError("delta_st must be < 0")

    def pe_at_light_shift(log_ost: float) -> float:
        d = LaserDrive(omega_w, math.exp(log_ost), 0.0, delta_st, st_copropagates)
        d = d.with_(delta_w=analytics.light_shift(d))
        return steady_state(build_generator(atom, d, scheme))[E, E].real

    lo, hi = math.log(1e-3 * abs(delta_st)), math.log(abs(delta_st))
    log_ost, _ = golden_section_max(pe_at_light_shift, lo, hi, math.log1p(rtol))
    d = LaserDrive(omega_w, math.exp(log_ost), 0.0, delta_st, st_copropagates)
    return d.with_(delta_w=cooling_detuning(atom, d))
