"""Acceptance checks: each criterion is a function returning a
:class:`CriterionResult`, run by ``ladder-cooling verify`` and by the test
suite."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analytics, cooling
from .model import (CA_DIPOLE_GAMMA, E, AtomSpec, LaserDrive, Scheme, build_generator, mhz,
                    preset, pure_state, to_mhz, wavevector_ratio)
from .optimize import golden_section_max
from .steady_state import evolve, peak_and_fwhm, scan_delta_w, steady_state

SEED = 20080301


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str) -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failing = [c.name for c in self.checks if not c.passed]
        extra = f" (failing: {', '.join(failing)})" if failing else ""
        return f"[{status}] {self.number}. {self.title}{extra} [{self.elapsed:.1f} s]"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "elapsed_s": self.elapsed,
                "checks": [c.__dict__ for c in self.checks]}


def _ca() -> AtomSpec:
    return preset("ca")


def mutated_pe_exact(atom: AtomSpec, drive: LaserDrive) -> float:
    """Closed form with a 1e-6 relative error in the denominator (sensitivity check)."""
    return drive.omega_st ** 2 * drive.omega_w ** 2 / (analytics.denominator(atom, drive) * (1 + 1e-6))


def random_drives(n: int, rng: np.random.Generator, atom: AtomSpec):
    """Draws: Omega_w log-uniform in [1e-3, 1] gamma, Omega_st log-uniform in
    [0.1, 10] gamma, detunings uniform in [-20, 20] gamma, beta_eg in {0.75, 1}."""
    g = atom.gamma
    for _ in range(n):
        ow = g * 10 ** rng.uniform(-3, 0)
        ost = g * 10 ** rng.uniform(-1, 1)
        dw, dst = rng.uniform(-20, 20, 2) * g
        beta = float(rng.choice([0.75, 1.0]))
        yield atom.with_(beta_eg=beta), LaserDrive(ow, ost, dw, dst)


def criterion_closed_form(pe_formula: Callable = analytics.pe_exact, n: int = 1000) -> CriterionResult:
    res = CriterionResult(1, "closed form vs steady-state solver")
    start = time.perf_counter()
    worst = 0.0
    for atom, drive in random_drives(n, np.random.default_rng(SEED), _ca()):
        numeric = steady_state(build_generator(atom, drive))[E, E].real
        closed = pe_formula(atom, drive)
        worst = max(worst, abs(numeric - closed) / closed)
    res.elapsed = time.perf_counter() - start
    res.add("relative error < 1e-9", worst < 1e-9, f"max relative error {worst:.3g} over {n} draws")
    res.add("runtime < 5 s", res.elapsed < 5.0, f"{res.elapsed:.2f} s")
    return res


def slowest_relaxation(gen: np.ndarray) -> float:
    ev = np.linalg.eigvals(gen)
    ev = ev[np.abs(ev) > 1e-9 * np.abs(gen).max()]
    return float(-ev.real.max())


def oracle_draws(n: int, rng: np.random.Generator, atom: AtomSpec, t_final: float):
    """Strong-drive draws for the time-integration oracle.

    Omega_w in [0.3, 2] gamma, Omega_st in [0.3, 3] gamma (log-uniform),
    detunings in [-2, 2] gamma.  A draw whose slowest relaxation rate gives
    fewer than 25 e-folds by ``t_final`` is redrawn: the integration cannot
    converge there, whatever the solver.
    """
    g = atom.gamma
    out = []
    while len(out) < n:
        ow = g * 10 ** rng.uniform(math.log10(0.3), math.log10(2))
        ost = g * 10 ** rng.uniform(math.log10(0.3), math.log10(3))
        dw, dst = rng.uniform(-2, 2, 2) * g
        a = atom.with_(beta_eg=float(rng.choice([0.75, 1.0])))
        d = LaserDrive(ow, ost, dw, dst)
        if slowest_relaxation(build_generator(a, d)) * t_final >= 25:
            out.append((a, d))
    return out


def criterion_oracle(n: int = 50) -> CriterionResult:
    res = CriterionResult(2, "steady state vs RK4 evolution to 500/gamma")
    atom = _ca()
    t_final = 500 / atom.gamma
    draws = oracle_draws(n, np.random.default_rng(SEED + 1), atom, t_final)
    start = time.perf_counter()
    worst = 0.0
    for a, d in draws:
        gen = build_generator(a, d)
        rho_t = evolve(gen, pure_state(0), t_final)
        worst = max(worst, np.abs(rho_t - steady_state(gen)).max())
    res.elapsed = time.perf_counter() - start
    res.add("elementwise < 1e-8", worst < 1e-8, f"max deviation {worst:.3g} over {n} draws")
    res.add("runtime < 30 s", res.elapsed < 30.0, f"{res.elapsed:.2f} s")
    return res


def fig3_peak(atom: AtomSpec, omega_w: float, omega_st: float = mhz(100)) -> tuple[float, float]:
    """Max p_e over Delta_st with Delta_w = delta_LS; returns (p_e, Delta_st)."""
    def pe(log_abs_dst: float) -> float:
        d = LaserDrive(omega_w, omega_st, 0.0, -math.exp(log_abs_dst))
        d = d.with_(delta_w=analytics.light_shift(d))
        return steady_state(build_generator(atom, d))[E, E].real

    x, value = golden_section_max(pe, math.log(omega_st / 20), math.log(omega_st * 20), 1e-6)
    return value, -math.exp(x)


def criterion_fig3_peak() -> CriterionResult:
    res = CriterionResult(3, "maximum excited population at fixed weak coupling")
    start = time.perf_counter()
    atom = _ca()
    omega_w = mhz(1.0)
    value, dst = fig3_peak(atom, omega_w)
    target = omega_w / (2 * math.sqrt(2) * atom.gamma)
    res.elapsed = time.perf_counter() - start
    res.add("max p_e close to 0.02", abs(value - 0.02) < 0.005,
            f"p_e = {value:.5f} at delta_st/2pi = {to_mhz(dst):.1f} MHz")
    err = abs(value - target) / target
    res.add("within 3% of omega_w/(2 sqrt2 gamma)", err < 0.03,
            f"{value:.5f} vs {target:.5f}: {100 * err:.2f}%")
    return res


def criterion_optimal_drive() -> CriterionResult:
    res = CriterionResult(4, "optimal strong Rabi frequency")
    start = time.perf_counter()
    atom = _ca()
    dst = mhz(-200)
    for omega_w_mhz, expected in ((0.1, 34.0), (1.0, 106.0)):
        drive = cooling.optimize_drive(atom, mhz(omega_w_mhz), dst)
        got = to_mhz(drive.omega_st)
        err = abs(got - expected) / expected
        res.add(f"numeric optimum at omega_w={omega_w_mhz} MHz within 5% of {expected:g} MHz",
                err < 0.05, f"{got:.2f} MHz ({100 * err:.2f}%)")
        predicted = to_mhz(analytics.optimal_ratio(atom, mhz(omega_w_mhz), dst).omega_st)
        err_an = abs(predicted - got) / got
        res.add(f"closed-form optimum within 7% of numeric at omega_w={omega_w_mhz} MHz",
                err_an < 0.07, f"{predicted:.2f} vs {got:.2f} MHz ({100 * err_an:.2f}%)")
    res.elapsed = time.perf_counter() - start
    return res


def measured_fwhm(atom: AtomSpec, drive: LaserDrive) -> float:
    return peak_and_fwhm(scan_delta_w(atom, drive), "p_e").fwhm


def criterion_linewidth() -> CriterionResult:
    res = CriterionResult(5, "resonance linewidth vs effective-linewidth formula")
    start = time.perf_counter()
    atom = _ca()
    dst = mhz(-200)
    worst = 0.0
    for omega_w_mhz in (0.1, 0.5, 1.0):
        for ratio in (0.1, 0.2, 0.3, 0.5, 0.7, 1.0):
            d = LaserDrive(mhz(omega_w_mhz), ratio * abs(dst), 0.0, dst)
            fwhm = measured_fwhm(atom, d)
            worst = max(worst, abs(fwhm - analytics.gamma_eff(atom, d)) / fwhm)
    res.add("agreement within 5% (omega_w <= 1 MHz, ratio <= 1)", worst < 0.05,
            f"max relative deviation {100 * worst:.2f}%")
    ratios = []
    for ratio in (1.0, 2.0, 5.0, 10.0):
        d = LaserDrive(mhz(5.0), ratio * abs(dst), 0.0, dst)
        ratios.append(analytics.gamma_eff(atom, d) / measured_fwhm(atom, d))
    res.add("formula overestimates at omega_w = 5 MHz, ratio >= 1", min(ratios) > 1.0,
            "formula/numeric = " + ", ".join(f"{r:.3f}" for r in ratios))
    res.elapsed = time.perf_counter() - start
    return res


def criterion_lambda_ceiling() -> CriterionResult:
    res = CriterionResult(6, "Lambda-scheme ceiling and strong-weak-coupling ladder")
    start = time.perf_counter()
    atom = _ca()
    g = atom.gamma
    value, dw, dst = analytics.lambda_pe_max(atom, LaserDrive(2 * g, 2 * g, 0.0, 0.0),
                                             return_detunings=True)
    res.add("Lambda max p_e = 0.20 +/- 0.02", abs(value - 0.20) <= 0.02,
            f"p_e = {value:.4f} at delta_w = {dw / g:.2f} gamma, delta_st = {dst / g:.2f} gamma "
            "(omega_w = omega_st = 2 gamma, beta_eg = 1)")
    ladder, drive = analytics.ladder_pe_max(atom, mhz(7.0), -10 * g)
    res.add("ladder at omega_w = 7 MHz reaches p_e >= 0.08", ladder >= 0.08,
            f"p_e = {ladder:.4f} at omega_st/2pi = {to_mhz(drive.omega_st):.1f} MHz")
    res.elapsed = time.perf_counter() - start
    return res


def fig5_drive(atom: AtomSpec, omega_w: float, delta_st: float | None = None) -> LaserDrive:
    """Drive with Omega_st from the closed-form optimum; Delta_w left at 0."""
    if delta_st is None:
        delta_st = -10 * atom.gamma
    report = analytics.optimal_ratio(atom, omega_w, delta_st)
    return LaserDrive(omega_w, report.omega_st, 0.0, delta_st)


def temperature_vs_relative_detuning(atom: AtomSpec, drive: LaserDrive, relative) -> np.ndarray:
    shift = analytics.light_shift(drive)
    return np.array([cooling.doppler_temperature(atom, drive.with_(delta_w=shift + x)).temperature
                     for x in relative])


def criterion_cooling() -> CriterionResult:
    res = CriterionResult(7, "Doppler cooling: damping sign, temperature minimum and limits")
    start = time.perf_counter()
    atom = _ca()

    betas = []
    for omega_w_mhz in (0.1, 0.5, 1.0):
        d = fig5_drive(atom, mhz(omega_w_mhz))
        width = analytics.gamma_eff(atom, d)
        for x in np.linspace(-3, -0.1, 12) * width:
            betas.append(cooling.damping(atom, d.with_(delta_w=analytics.light_shift(d) + x)))
    res.add("beta > 0 for red relative detuning", min(betas) > 0,
            f"min beta = {min(betas):.3g} kg/s over {len(betas)} points")

    step = 0.05
    grid = np.arange(-2.0, -step / 2, step)
    for omega_w_mhz in (0.1, 1.0):
        d = fig5_drive(atom, mhz(omega_w_mhz))
        width = analytics.gamma_eff(atom, d)
        temps = temperature_vs_relative_detuning(atom, d, grid * width)
        best = grid[int(np.argmin(temps))]
        res.add(f"T minimum at -gamma_eff/2 (omega_w = {omega_w_mhz} MHz)",
                abs(best + 0.5) <= step + 1e-12,
                f"argmin at {best:.2f} gamma_eff, grid step {step} gamma_eff")

    curve = cooling.min_temperature_curve(atom, mhz(0.1), [0.1])
    t_small = curve.columns["T_D"][0]
    res.add("Ca+ T_D < 100 uK at small ratio (omega_w = 0.1 MHz)", t_small < 100e-6,
            f"T_D = {t_small * 1e6:.2f} uK at ratio 0.1")

    t_two = cooling.two_level_doppler_limit(CA_DIPOLE_GAMMA)
    res.add("two-level Ca+ reference 0.55 mK +/- 10%", abs(t_two - 0.55e-3) <= 0.055e-3,
            f"{t_two * 1e3:.3f} mK")

    ratios = np.geomspace(0.05, 10, 15)
    worst = 0.0
    for omega_w_mhz in (0.1, 1.0):
        a = cooling.min_temperature_curve(atom, mhz(omega_w_mhz), ratios, -10 * atom.gamma)
        b = cooling.min_temperature_curve(atom, mhz(omega_w_mhz), ratios, -20 * atom.gamma)
        worst = max(worst, float(np.max(np.abs(a.columns["T_D"] / b.columns["T_D"] - 1))))
    res.add("T_D(ratio) for delta_st = -10 vs -20 gamma within 2%", worst < 0.02,
            f"max relative difference {100 * worst:.2f}%")
    res.elapsed = time.perf_counter() - start
    return res


def criterion_geometry() -> CriterionResult:
    res = CriterionResult(8, "wavevector sum/difference ratios")
    start = time.perf_counter()
    for name, expected in (("ca", 11.9), ("sr", 4.4), ("ba", 1.9)):
        r = wavevector_ratio(preset(name))
        res.add(f"{preset(name).name} ratio {expected} +/- 0.1", abs(r - expected) <= 0.1, f"{r:.3f}")
    res.elapsed = time.perf_counter() - start
    return res


def criterion_force_identity(n: int = 200) -> CriterionResult:
    res = CriterionResult(9, "coherence-form and population-form forces agree")
    start = time.perf_counter()
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    count = 0
    for atom, drive in random_drives(n, rng, _ca()):
        co = bool(rng.integers(2))
        drive = drive.with_(st_copropagates=co)
        k = cooling._k_scale(atom, drive)
        for scheme in (Scheme.LADDER, Scheme.LAMBDA):
            v = rng.uniform(-3, 3) * atom.gamma / k
            pop, coh, _ = cooling.force_forms(atom, drive, scheme, v)
            cooling.force(atom, drive, scheme, v)
            worst = max(worst, abs(pop - coh) / max(abs(pop), abs(coh)))
            count += 1
    res.add("relative disagreement < 1e-8", worst < 1e-8,
            f"max {worst:.3g} over {count} evaluations; every force() call also asserts it")
    res.elapsed = time.perf_counter() - start
    return res


CRITERIA = (
    criterion_closed_form,
    criterion_oracle,
    criterion_fig3_peak,
    criterion_optimal_drive,
    criterion_linewidth,
    criterion_lambda_ceiling,
    criterion_cooling,
    criterion_geometry,
    criterion_force_identity,
)


def run_all(mutate_denominator: bool = False) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        if crit is criterion_closed_form and mutate_denominator:
            results.append(crit(pe_formula=mutated_pe_exact))
        else:
            results.append(crit())
    return results
