"""Atomic and laser parameters, ion presets and the Liouvillian of the
three-level system.

Levels are indexed g=0, m=1, e=2.  All frequencies are angular (rad/s);
the helpers :func:`mhz` and :func:`to_mhz` convert from and to the
"value/2pi in MHz" convention used for user-facing numbers.

The density matrix is vectorized row-major, ``vec(rho)[3*i + j] = rho[i, j]``,
so that ``vec(A @ rho @ B) = kron(A, B.T) @ vec(rho)``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants

HBAR = constants.hbar
KB = constants.k
AMU = constants.atomic_mass

G, M, E = 0, 1, 2
N_LEVELS = 3
POPULATION_INDICES = (0, 4, 8)


def mhz(value: float) -> float:
    """Angular frequency (rad/s) of ``value`` given as value/2pi in MHz."""
    return 2.0 * math.pi * 1e6 * value


def to_mhz(omega: float) -> float:
    return omega / (2.0 * math.pi * 1e6)


class Scheme(enum.Enum):
    LADDER = "ladder"
    LAMBDA = "lambda"

    @classmethod
    def parse(cls, value: "Scheme | str") -> "Scheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown scheme {value!r}; expected 'ladder' or 'lambda'") from None


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class AtomSpec:
    """Decay rate ``gamma`` of |e>, branching ratio of |e> -> |g>, the two
    excitation wavelengths and the mass.  The |e> -> |m> branching ratio is
    ``1 - beta_eg``."""

    gamma: float
    beta_eg: float
    lambda_w: float
    lambda_st: float
    mass: float
    name: str = ""

    def __post_init__(self):
        _require_finite(gamma=self.gamma, beta_eg=self.beta_eg, lambda_w=self.lambda_w,
                        lambda_st=self.lambda_st, mass=self.mass)
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if not 0.0 < self.beta_eg <= 1.0:
            raise ValueError("beta_eg must lie in (0, 1]")
        if self.lambda_w <= 0 or self.lambda_st <= 0:
            raise ValueError("wavelengths must be > 0")
        if self.mass <= 0:
            raise ValueError("mass must be > 0")

    @property
    def beta_em(self) -> float:
        return 1.0 - self.beta_eg

    @property
    def k_w(self) -> float:
        return 2.0 * math.pi / self.lambda_w

    @property
    def k_st_magnitude(self) -> float:
        return 2.0 * math.pi / self.lambda_st

    def with_(self, **changes) -> "AtomSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class LaserDrive:
    """Rabi frequencies and detunings of the weak (g-m) and strong (m-e)
    lasers.  For the Lambda scheme ``delta_w`` is the g-e detuning and
    ``delta_st`` the m-e detuning."""

    omega_w: float
    omega_st: float
    delta_w: float
    delta_st: float
    st_copropagates: bool = True

    def __post_init__(self):
        _require_finite(omega_w=self.omega_w, omega_st=self.omega_st,
                        delta_w=self.delta_w, delta_st=self.delta_st)
        if self.omega_w < 0 or self.omega_st < 0:
            raise ValueError("Rabi frequencies must be >= 0")

    def with_(self, **changes) -> "LaserDrive":
        return replace(self, **changes)


# Common decay rate of |e> for all presets, with beta_eg = 1 unless stated.
DEFAULT_GAMMA = mhz(20.0)

PRESETS = {
    "ca": AtomSpec(DEFAULT_GAMMA, 1.0, 732e-9, 866e-9, 40 * AMU, "Ca+"),
    "sr": AtomSpec(DEFAULT_GAMMA, 1.0, 687e-9, 1092e-9, 88 * AMU, "Sr+"),
    "ba": AtomSpec(DEFAULT_GAMMA, 1.0, 2051e-9, 650e-9, 138 * AMU, "Ba+"),
    "ba-0.75": AtomSpec(DEFAULT_GAMMA, 0.75, 2051e-9, 650e-9, 138 * AMU, "Ba+ (beta_eg=0.75)"),
}

# S1/2 - P1/2 dipole line of Ca+ (P1/2 lifetime 7.1 ns) for the two-level reference.
CA_DIPOLE_GAMMA = 1.0 / 7.1e-9


def preset(name: str) -> AtomSpec:
    """Look up an ion preset; accepts ``Ca+``, ``ca``, ``Ba+-0.75`` etc."""
    key = name.strip().lower().replace("+", "")
    try:
        return PRESETS[key]
    except KeyError:
        raise ValueError(f"unknown ion preset {name!r}; known: {sorted(PRESETS)}") from None


def k_st(atom: AtomSpec, st_copropagates: bool) -> float:
    """Signed projection of the strong-laser wavevector on the weak-beam axis."""
    return atom.k_st_magnitude if st_copropagates else -atom.k_st_magnitude


def effective_wavevector(atom: AtomSpec, st_copropagates: bool = True) -> float:
    """k_w + k_st with the sign convention of :func:`k_st` (rad/m)."""
    return atom.k_w + k_st(atom, st_copropagates)


def wavevector_ratio(atom: AtomSpec) -> float:
    """|k_w + |k_st|| / |k_w - |k_st||, copropagating over counterpropagating."""
    return abs(effective_wavevector(atom, True) / effective_wavevector(atom, False))


def doppler_shift(drive: LaserDrive, atom: AtomSpec, v: float) -> LaserDrive:
    """Detunings seen by an atom moving at velocity ``v`` (m/s) along the weak beam."""
    if v == 0:
        return drive
    return drive.with_(delta_w=drive.delta_w - atom.k_w * v,
                       delta_st=drive.delta_st - k_st(atom, drive.st_copropagates) * v)


def hamiltonian(drive: LaserDrive, scheme: Scheme = Scheme.LADDER) -> np.ndarray:
    """Rotating-frame Hamiltonian over hbar (rad/s), position phases dropped."""
    scheme = Scheme.parse(scheme)
    H = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    if scheme is Scheme.LADDER:
        H[M, M] = -drive.delta_w
        H[E, E] = -(drive.delta_w + drive.delta_st)
        H[G, M] = H[M, G] = drive.omega_w / 2
    else:
        H[E, E] = -drive.delta_w
        H[M, M] = -drive.delta_w + drive.delta_st
        H[G, E] = H[E, G] = drive.omega_w / 2
    H[M, E] = H[E, M] = drive.omega_st / 2
    return H


def jump_operators(atom: AtomSpec) -> list[np.ndarray]:
    """Collapse operators for |e> -> |g> and |e> -> |m>; |m> does not decay."""
    ops = []
    for target, rate in ((G, atom.beta_eg * atom.gamma), (M, atom.beta_em * atom.gamma)):
        C = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
        C[target, E] = math.sqrt(rate)
        ops.append(C)
    return ops


def liouvillian(H: np.ndarray, jumps: list[np.ndarray]) -> np.ndarray:
    """Row-major superoperator of -i[H, .] plus the Lindblad dissipators."""
    eye = np.eye(N_LEVELS)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for C in jumps:
        CdC = C.conj().T @ C
        L = L + np.kron(C, C.conj()) - 0.5 * (np.kron(CdC, eye) + np.kron(eye, CdC.T))
    return L


def _unit_drive(**nonzero) -> LaserDrive:
    base = dict(omega_w=0.0, omega_st=0.0, delta_w=0.0, delta_st=0.0)
    base.update(nonzero)
    return LaserDrive(**base)


@functools.lru_cache(maxsize=None)
def _generator_basis(scheme: Scheme) -> tuple[np.ndarray, ...]:
    # L is linear in (delta_w, delta_st, omega_w, omega_st, beta_eg*gamma, beta_em*gamma).
    coherent = [liouvillian(hamiltonian(_unit_drive(**{name: 1.0}), scheme), [])
                for name in ("delta_w", "delta_st", "omega_w", "omega_st")]
    dissipative = []
    for target in (G, M):
        C = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
        C[target, E] = 1.0
        dissipative.append(liouvillian(np.zeros((N_LEVELS, N_LEVELS)), [C]))
    basis = tuple(coherent + dissipative)
    for b in basis:
        b.setflags(write=False)
    return basis


def build_generator(atom: AtomSpec, drive: LaserDrive,
                    scheme: Scheme | str = Scheme.LADDER) -> np.ndarray:
    """Return the 9x9 Liouvillian ``L`` with ``d vec(rho)/dt = L @ vec(rho)``."""
    scheme = Scheme.parse(scheme)
    coeffs = (drive.delta_w, drive.delta_st, drive.omega_w, drive.omega_st,
              atom.beta_eg * atom.gamma, atom.beta_em * atom.gamma)
    L = np.zeros((N_LEVELS ** 2, N_LEVELS ** 2), dtype=complex)
    for c, b in zip(coeffs, _generator_basis(scheme)):
        if c:
            L += c * b
    return L


def validate_density_matrix(rho: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Check shape, Hermiticity, unit trace and physical diagonal."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (N_LEVELS, N_LEVELS):
        raise ValueError(f"density matrix must be 3x3, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError("density matrix trace differs from 1")
    diag = np.diag(rho).real
    if np.any(diag < -1e-9) or np.any(diag > 1 + 1e-9):
        raise ValueError("density matrix populations outside [0, 1]")
    return rho


def pure_state(level: int) -> np.ndarray:
    rho = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    rho[level, level] = 1.0
    return rho
