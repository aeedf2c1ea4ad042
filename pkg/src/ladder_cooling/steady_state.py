"""Steady state of the master equation, a Runge-Kutta time-evolution
oracle, and spectrum scans with peak / FWHM extraction."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from . import analytics
from .model import (AMU, N_LEVELS, POPULATION_INDICES, AtomSpec, LaserDrive, Scheme,
                    build_generator, validate_density_matrix)
from .results import POPULATION_COLUMNS, ScanResult

RCOND_THRESHOLD = 1e-12
# Row of L replaced by the trace constraint (the |g><g| population row).
_TRACE_ROW = POPULATION_INDICES[0]
# vec index of rho[j, i] for each vec index of rho[i, j].
_TRANSPOSE = np.arange(N_LEVELS ** 2).reshape(N_LEVELS, N_LEVELS).T.reshape(-1)


class DegenerateSteadyState(ArithmeticError):
    """The stationary subspace of the generator is not one-dimensional."""


class StepTooLarge(ArithmeticError):
    """Fixed-step integration lost trace or norm; reduce ``dt``."""


class PeakNotBracketed(ValueError):
    pass


class HalfMaxNotBracketed(ValueError):
    pass


def steady_state(gen: np.ndarray) -> np.ndarray:
    """Solve ``L vec(rho) = 0`` with ``tr(rho) = 1``.

    One population row of ``L`` is replaced by the trace constraint and the
    square system is solved by LU with partial pivoting.  The generator is
    scaled to unit infinity norm first so that the reciprocal condition
    estimate is dimensionless.

    Raises
    ------
    DegenerateSteadyState
        If the reciprocal condition estimate falls below ``1e-12``, e.g. with
        no weak-laser coupling in the ladder scheme, where any mixture of |g>
        and |m> is stationary.
    """
    L = np.asarray(gen, dtype=complex)
    if L.shape != (N_LEVELS ** 2, N_LEVELS ** 2):
        raise ValueError(f"generator must be 9x9, got {L.shape}")
    if not np.all(np.isfinite(L)):
        raise ValueError("generator has non-finite entries")
    scale = np.abs(L).sum(axis=1).max()
    if scale == 0:
        raise DegenerateSteadyState("generator is identically zero: every state is stationary")
    A = L / scale
    A[_TRACE_ROW, :] = 0
    A[_TRACE_ROW, list(POPULATION_INDICES)] = 1
    rhs = np.zeros(N_LEVELS ** 2, dtype=complex)
    rhs[_TRACE_ROW] = 1

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A)
    anorm = np.abs(A).sum(axis=0).max()
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    if not rcond >= RCOND_THRESHOLD:
        raise DegenerateSteadyState(
            f"stationary subspace is degenerate (reciprocal condition {rcond:.3g} < "
            f"{RCOND_THRESHOLD:g}); with no weak coupling any g/m mixture is stationary")
    x = scipy.linalg.lu_solve((lu, piv), rhs)
    x += scipy.linalg.lu_solve((lu, piv), rhs - A @ x)

    rho = x.reshape(N_LEVELS, N_LEVELS)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = np.abs(L @ rho.reshape(-1)).max()
    if residual > 1e-10 * np.abs(L).sum(axis=1).max():
        raise DegenerateSteadyState(f"steady-state residual {residual:.3g} too large")
    return rho


def populations(rho: np.ndarray) -> np.ndarray:
    return np.clip(np.diag(rho).real, 0.0, 1.0)


def stable_step(gen: np.ndarray) -> float:
    """Recommended RK4 step: 0.05 over the largest rate in the generator."""
    return 0.05 / np.abs(np.asarray(gen)).max()


def rk4_propagator(gen: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step for the linear ODE, as a matrix."""
    L = np.asarray(gen, dtype=complex)
    x = np.eye(L.shape[0], dtype=complex)
    k1 = L @ x
    k2 = L @ (x + 0.5 * dt * k1)
    k3 = L @ (x + 0.5 * dt * k2)
    k4 = L @ (x + dt * k3)
    return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve(gen: np.ndarray, rho0: np.ndarray, t_final: float,
           dt: float | None = None) -> np.ndarray:
    """Integrate the master equation from ``rho0`` over ``t_final`` seconds.

    Fixed-step classical RK4; the step is shortened so that an integer
    number of steps lands exactly on ``t_final``.  Hermiticity is restored
    after every step.  ``dt`` defaults to :func:`stable_step`.
    """
    rho0 = validate_density_matrix(rho0)
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    if t_final == 0:
        return rho0.copy()
    if dt is None:
        dt = stable_step(gen)
    if not dt > 0:
        raise ValueError("dt must be > 0")
    n_steps = max(1, math.ceil(t_final / dt - 1e-9))
    P = rk4_propagator(gen, t_final / n_steps)

    x = rho0.reshape(-1).copy()
    for step in range(n_steps):
        x = P @ x
        x = 0.5 * (x + x[_TRANSPOSE].conj())
        drift = abs(x[0] + x[4] + x[8] - 1.0)
        if drift > 1e-6:
            raise StepTooLarge(f"trace drift {drift:.3g} at step {step + 1}/{n_steps}; reduce dt")
        # |rho_ij| <= 1 for any density matrix; checked sparsely to keep the loop cheap.
        if step % 64 == 0 and np.abs(x).max() > 1.0 + 1e-6:
            raise StepTooLarge(f"integration diverged at step {step + 1}/{n_steps}; reduce dt")
    if np.abs(x).max() > 1.0 + 1e-6:
        raise StepTooLarge("integration diverged; reduce dt")
    return x.reshape(N_LEVELS, N_LEVELS)


def _steady_populations(atom: AtomSpec, drive: LaserDrive, scheme: Scheme) -> np.ndarray:
    return populations(steady_state(build_generator(atom, drive, scheme)))


def _fixed_snapshot(atom: AtomSpec, drive: LaserDrive, scheme: Scheme, **extra) -> dict:
    snap = {
        "ion": atom.name,
        "gamma_mhz": atom.gamma / (2e6 * math.pi),
        "beta_eg": atom.beta_eg,
        "lambda_w_nm": atom.lambda_w * 1e9,
        "lambda_st_nm": atom.lambda_st * 1e9,
        "mass_u": atom.mass / AMU,
        "omega_w_mhz": drive.omega_w / (2e6 * math.pi),
        "omega_st_mhz": drive.omega_st / (2e6 * math.pi),
        "delta_w_mhz": drive.delta_w / (2e6 * math.pi),
        "delta_st_mhz": drive.delta_st / (2e6 * math.pi),
        "st_copropagates": drive.st_copropagates,
        "scheme": Scheme.parse(scheme).value,
    }
    snap.update(extra)
    return snap


def _population_scan(name: str, grid, make_drive: Callable[[float], LaserDrive],
                     atom: AtomSpec, scheme: Scheme, fixed: dict) -> ScanResult:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ValueError("scan grid must be a non-empty finite 1-D array")
    rows = np.empty((grid.size, N_LEVELS))
    for i, x in enumerate(grid):
        try:
            rows[i] = _steady_populations(atom, make_drive(x), scheme)
        except DegenerateSteadyState as exc:
            raise DegenerateSteadyState(f"{exc} (at grid point {i}, {name} = {x:.6g} rad/s)") from exc

    def evaluate(x: float) -> dict:
        p = _steady_populations(atom, make_drive(x), scheme)
        return dict(zip(POPULATION_COLUMNS, p))

    columns = {c: rows[:, j] for j, c in enumerate(POPULATION_COLUMNS)}
    return ScanResult(name, "rad/s", grid, columns, fixed, {}, evaluate)


def scan_delta_w(atom: AtomSpec, drive: LaserDrive, scheme: Scheme | str = Scheme.LADDER,
                 grid=None) -> ScanResult:
    """Steady-state populations versus the weak-laser detuning."""
    scheme = Scheme.parse(scheme)
    if grid is None:
        grid = default_delta_w_grid(atom, drive)
    fixed = _fixed_snapshot(atom, drive, scheme)
    fixed.pop("delta_w_mhz")
    return _population_scan("delta_w", grid, lambda x: drive.with_(delta_w=x), atom, scheme, fixed)


def scan_delta_st(atom: AtomSpec, drive: LaserDrive, scheme: Scheme | str = Scheme.LADDER,
                  grid=None, lock: str = "light_shift") -> ScanResult:
    """Populations versus the strong-laser detuning.

    ``lock`` slaves the weak detuning to the resonance for every point:
    ``"light_shift"`` (Delta_w = delta_LS), ``"corrected"`` (first-order
    corrected resonance) or ``"none"`` (keep ``drive.delta_w``).
    """
    scheme = Scheme.parse(scheme)
    if grid is None:
        raise ValueError("scan_delta_st needs an explicit grid")
    locks = {
        "light_shift": lambda d: analytics.light_shift(d),
        "corrected": lambda d: analytics.corrected_resonance(atom, d),
        "none": lambda d: d.delta_w,
    }
    if lock not in locks:
        raise ValueError(f"unknown lock {lock!r}")

    def make_drive(x: float) -> LaserDrive:
        d = drive.with_(delta_st=x)
        return d.with_(delta_w=locks[lock](d))

    fixed = _fixed_snapshot(atom, drive, scheme, delta_w_lock=lock)
    fixed.pop("delta_st_mhz")
    if lock != "none":
        fixed.pop("delta_w_mhz")
    return _population_scan("delta_st", grid, make_drive, atom, scheme, fixed)


def default_delta_w_grid(atom: AtomSpec, drive: LaserDrive, points: int = 801,
                         half_width: float = 10.0) -> np.ndarray:
    """``points`` values spanning delta_LS +/- ``half_width`` * Gamma_eff."""
    center = analytics.light_shift(drive)
    width = analytics.gamma_eff(atom, drive)
    if width <= 0:
        width = atom.gamma
    return np.linspace(center - half_width * width, center + half_width * width, points)


@dataclass(frozen=True)
class PeakSummary:
    peak_abscissa: float
    peak_value: float
    fwhm: float
    left_half_crossing: float
    right_half_crossing: float

    def __post_init__(self):
        if not self.left_half_crossing < self.peak_abscissa < self.right_half_crossing:
            raise ValueError("half-maximum crossings do not bracket the peak")
        if not self.fwhm > 0:
            raise ValueError("fwhm must be positive")


def _bisect(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    fa = f(a)
    while abs(b - a) > tol:
        c = 0.5 * (a + b)
        fc = f(c)
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
    return 0.5 * (a + b)


def peak_and_fwhm(scan: ScanResult, column: str = "p_e",
                  evaluate: Callable[[float], float] | None = None,
                  rtol: float = 1e-4) -> PeakSummary:
    """Locate the maximum of ``column`` and its full width at half maximum.

    The peak is refined by a parabola through the three samples around the
    discrete maximum.  Half-maximum crossings are bracketed on the grid and
    refined by bisection on ``evaluate`` (defaults to the scan's own model
    evaluator) to ``rtol`` times the width; without any evaluator they are
    linearly interpolated.
    """
    x = scan.abscissa
    y = scan.columns[column]
    if x.size > 1 and x[1] < x[0]:
        x, y = x[::-1], y[::-1]
    if evaluate is None and scan.evaluate is not None:
        inner = scan.evaluate
        evaluate = lambda t: inner(t)[column]  # noqa: E731

    i = int(np.argmax(y))
    if i == 0 or i == x.size - 1:
        raise PeakNotBracketed(f"maximum of {column!r} lies at the grid edge ({scan.name} = {x[i]:.6g})")
    x0, x1, x2 = x[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 ** 2 * (y0 - y1) + x1 ** 2 * (y2 - y0) + x0 ** 2 * (y1 - y2)) / denom
    if a < 0:
        xp = min(max(-b / (2 * a), x0), x2)
    else:
        xp = x1
    if evaluate is not None:
        yp = max(float(evaluate(xp)), y1)
        if yp == y1:
            xp = x1
    else:
        c = y1 - a * x1 ** 2 - b * x1
        yp = a * xp ** 2 + b * xp + c if a < 0 else y1
    half = 0.5 * yp

    below_left = np.nonzero(y[:i] < half)[0]
    below_right = np.nonzero(y[i + 1:] < half)[0]
    if below_left.size == 0 or below_right.size == 0:
        raise HalfMaxNotBracketed(f"half maximum of {column!r} not reached inside the grid")
    jl = below_left[-1]
    jr = i + 1 + below_right[0]

    def interp(j: int) -> float:
        return x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j])

    left, right = interp(jl), interp(jr - 1)
    if evaluate is not None:
        tol = rtol * (right - left)
        g = lambda t: float(evaluate(t)) - half  # noqa: E731
        left = _bisect(g, x[jl], x[jl + 1], tol)
        right = _bisect(g, x[jr - 1], x[jr], tol)
    return PeakSummary(xp, yp, right - left, left, right)
