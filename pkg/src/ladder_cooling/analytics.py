"""Closed-form results for an atom at rest: excited-state population,
light shift, resonance position, maximum population, optimal coupling and
resonance linewidths.

Formulas are implemented term by term; the numerical solver
in :mod:`ladder_cooling.steady_state` is the independent check.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .model import AtomSpec, LaserDrive, Scheme, build_generator
from .optimize import golden_section_max

REGIME_FACTOR = 100.0  # "a**2 << b**2" is taken to mean a**2 <= b**2 / 100


def _much_less(a_sq: float, b_sq: float) -> bool:
    return a_sq * REGIME_FACTOR <= b_sq


def denominator(atom: AtomSpec, drive: LaserDrive) -> float:
    g, b = atom.gamma, atom.beta_eg
    ow, ost = drive.omega_w, drive.omega_st
    dw, dst = drive.delta_w, drive.delta_st
    two_photon = 4 * dw * (dw + dst)
    return (b * (two_photon * (two_photon + 2 * ow ** 2 - 2 * ost ** 2)
                 + 4 * dw ** 2 * g ** 2 + ost ** 4)
            + (b - 1) * 2 * ow ** 2 * (2 * dw ** 2 + 4 * dw * dst - ost ** 2)
            + 2 * ow ** 2 * (4 * (dw + dst) ** 2 + g ** 2 + ow ** 2))


def pe_exact(atom: AtomSpec, drive: LaserDrive) -> float:
    """Exact steady-state population of |e> in the ladder scheme."""
    D = denominator(atom, drive)
    if D == 0:
        raise ZeroDivisionError("population denominator vanishes (no weak coupling)")
    return drive.omega_st ** 2 * drive.omega_w ** 2 / D


def light_shift(drive: LaserDrive, approximate: bool = False) -> float:
    """Shift of the g-m resonance caused by the strong coupling (rad/s).

    ``approximate=True`` gives the large-detuning form Omega_st**2 / (4 Delta_st).
    """
    ost, dst = drive.omega_st, drive.delta_st
    if approximate:
        if dst == 0:
            raise ZeroDivisionError("large-detuning light shift needs delta_st != 0")
        return ost ** 2 / (4 * dst)
    return -(math.hypot(ost, dst) + dst) / 2


def corrected_resonance(atom: AtomSpec, drive: LaserDrive) -> float:
    """Weak detuning of maximum |e> population, first order in gamma**2/(Omega_st**2+Delta_st**2)."""
    s = drive.omega_st ** 2 + drive.delta_st ** 2
    delta = light_shift(drive)
    if s == 0:
        return delta
    return delta * (1 - atom.gamma ** 2 / (4 * s))


def resonance_regime_valid(atom: AtomSpec, drive: LaserDrive) -> bool:
    """Omega_w**2 << gamma**2 |Delta_w / Delta_st|, needed by corrected_resonance."""
    if drive.delta_st == 0:
        return False
    return _much_less(drive.omega_w ** 2, atom.gamma ** 2 * abs(drive.delta_w / drive.delta_st))


def pe_max(atom: AtomSpec, drive: LaserDrive) -> float:
    """Resonant maximum of the |e> population for Omega_w**2 << Omega_st**2."""
    g, b = atom.gamma, atom.beta_eg
    ow, ost, dst = drive.omega_w, drive.omega_st, drive.delta_st
    d = light_shift(drive)
    return 1.0 / (4 + 2 * dst / d
                  + b * 4 * d ** 2 * g ** 2 / (ost ** 2 * ow ** 2)
                  + (b - 1) * 4 * d * (d + 2 * dst) / ost ** 2
                  + 2 * g ** 2 / ost ** 2)


@dataclass(frozen=True)
class OptimumReport:
    ratio_sq: float
    pe_max_opt: float
    omega_st: float | None
    delta_st: float | None
    weak_much_less_strong: bool | None
    large_detuning: bool | None
    gamma_much_less_dressing: bool | None

    def to_dict(self) -> dict:
        return asdict(self)


def optimal_ratio(atom: AtomSpec, omega_w: float, delta_st: float | None = None,
                  omega_st: float | None = None) -> OptimumReport:
    """Optimal (Omega_st / Delta_st)**2 for a given weak Rabi frequency.

    With ``delta_st`` the corresponding optimal strong Rabi frequency is
    included.  The optimal population uses the full expression when a strong
    Rabi frequency is known (given or derived) and the simplified
    Omega_w / (2 sqrt(2 beta_eg) gamma) otherwise.
    """
    if not omega_w > 0:
        raise ValueError("omega_w must be > 0")
    g, b = atom.gamma, atom.beta_eg
    ratio_sq = 4 * omega_w / g * math.sqrt(2 / b)
    if omega_st is None and delta_st is not None:
        omega_st = abs(delta_st) * math.sqrt(ratio_sq)
    if omega_st:
        p = 1.0 / (4 + 2 * (b - 1) + 2 * math.sqrt(2 * b) * g / omega_w + 2 * g ** 2 / omega_st ** 2)
    else:
        p = omega_w / g / (2 * math.sqrt(2 * b))
    flags = [None, None, None]
    if omega_st:
        flags[0] = _much_less(omega_w ** 2, omega_st ** 2)
        if delta_st is not None:
            flags[1] = _much_less(omega_st ** 2, delta_st ** 2)
            flags[2] = _much_less(g ** 2, omega_st ** 2 + delta_st ** 2)
    return OptimumReport(ratio_sq, min(max(p, 0.0), 1.0), omega_st, delta_st, *flags)


def gamma_limit(atom: AtomSpec, drive: LaserDrive, simplified: bool = False) -> float:
    """Resonance FWHM in the limit of a vanishing weak coupling (rad/s).

    The closed form carries the sign of delta_LS; the magnitude is returned.
    """
    g = atom.gamma
    ost, dst = drive.omega_st, drive.delta_st
    if simplified:
        if dst == 0:
            return g / 2
        return g / 2 * (1 - 1 / math.sqrt(1 + ost ** 2 / dst ** 2))
    s = 4 * (ost ** 2 + dst ** 2) / g ** 2
    return abs(2 * light_shift(drive) / (1 + s) * math.sqrt(2 + s))


def gamma_eff(atom: AtomSpec, drive: LaserDrive, simplified: bool = False) -> float:
    """Power-broadened resonance FWHM, sqrt(Gamma_0**2 + 2 Omega_w**2)."""
    return math.hypot(gamma_limit(atom, drive, simplified), math.sqrt(2) * drive.omega_w)


def lambda_pe_max(atom: AtomSpec, drive: LaserDrive, span: float = 5.0,
                  points: int = 101, return_detunings: bool = False):
    """Largest steady |e> population of the Lambda scheme over both detunings.

    The detunings run over a ``points`` x ``points`` grid spanning
    +/- ``span`` gamma; the best cell is refined by a parabola along each
    axis.  ``drive`` supplies the Rabi frequencies only.
    """
    from .steady_state import steady_state

    def pe(dw: float, dst: float) -> float:
        d = drive.with_(delta_w=dw, delta_st=dst)
        return steady_state(build_generator(atom, d, Scheme.LAMBDA))[2, 2].real

    axis = np.linspace(-span, span, points) * atom.gamma
    values = np.array([[pe(dw, dst) for dst in axis] for dw in axis])
    i, j = np.unravel_index(np.argmax(values), values.shape)
    best = (values[i, j], axis[i], axis[j])

    def vertex(x, y) -> float:
        h = x[1] - x[0]
        curv = y[0] - 2 * y[1] + y[2]
        return x[1] if curv >= 0 else x[1] + 0.5 * h * (y[0] - y[2]) / curv

    dw, dst = axis[i], axis[j]
    if 0 < i < points - 1:
        dw = vertex(axis[i - 1:i + 2], values[i - 1:i + 2, j])
    if 0 < j < points - 1:
        dst = vertex(axis[j - 1:j + 2], values[i, j - 1:j + 2])
    refined = pe(dw, dst)
    if refined > best[0]:
        best = (refined, dw, dst)
    if return_detunings:
        return best
    return best[0]


def ladder_pe_max(atom: AtomSpec, omega_w: float, delta_st: float,
                  ratio_bounds: tuple[float, float] = (1e-2, 10.0),
                  rtol: float = 1e-4) -> tuple[float, LaserDrive]:
    """Largest steady |e> population of the ladder scheme at fixed Omega_w and Delta_st.

    Both the strong Rabi frequency (log-spaced golden section over
    ``ratio_bounds`` times |Delta_st|) and the weak detuning (golden section
    around the corrected resonance) are optimized.
    """
    from .steady_state import steady_state

    def pe(d: LaserDrive) -> float:
        return steady_state(build_generator(atom, d, Scheme.LADDER))[2, 2].real

    def best_over_delta_w(omega_st: float) -> tuple[float, float]:
        d = LaserDrive(omega_w, omega_st, 0.0, delta_st)
        center = corrected_resonance(atom, d)
        width = gamma_eff(atom, d)
        return golden_section_max(lambda x: pe(d.with_(delta_w=x)),
                                  center - width, center + width, rtol * width)

    lo, hi = (math.log(r * abs(delta_st)) for r in ratio_bounds)
    log_ost, value = golden_section_max(lambda s: best_over_delta_w(math.exp(s))[1],
                                        lo, hi, math.log1p(rtol))
    omega_st = math.exp(log_ost)
    delta_w, value = best_over_delta_w(omega_st)
    return value, LaserDrive(omega_w, omega_st, delta_w, delta_st)
