"""Two-ion crystal: axial normal modes and magnetic-gradient spin-motion coupling.

All frequencies are angular (rad/s).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants
from scipy.optimize import brentq

from .errors import InvalidParameterError

YB171_MASS = 171 * constants.atomic_mass
ZEEMAN_SENSITIVITY = 2 * np.pi * 14e9  # rad/s per T, mF=1 level
GRADIENT = 19.0  # T/m


def axial_modes(nu1: float) -> tuple[np.ndarray, np.ndarray]:
    """Normal modes of two identical ions in a harmonic well plus Coulomb repulsion.

    Lengths are scaled by (k e^2 / m nu1^2)^(1/3) so the potential becomes
    V = sum(u_i^2)/2 + 1/|u_1 - u_2| and the Hessian is in units of m nu1^2.
    Returns (mode_freqs, mode_vectors) with mode_vectors[j, k] the
    amplitude of ion j in mode k, sorted by frequency.
    """
    if not np.isfinite(nu1) or nu1 <= 0:
        raise InvalidParameterError(f"axial COM frequency must be positive, got {nu1}")

    # Equilibrium at u = (-d/2, d/2): force balance d/2 = 1/d^2.
    d = brentq(lambda x: x / 2 - 1 / x**2, 0.1, 10.0, xtol=1e-15)
    c = 2.0 / d**3  # d^2/du^2 of 1/|u1 - u2|
    hessian = np.array([[1 + c, -c], [-c, 1 + c]])
    evals, evecs = np.linalg.eigh(hessian)
    # Fix the sign so the first ion's amplitude is positive in every mode.
    evecs = evecs * np.sign(evecs[0])
    return nu1 * np.sqrt(evals), evecs


@dataclass(frozen=True, eq=False)
class IonCrystal:
    ion_mass: float
    axial_com_freq: float
    mode_freqs: np.ndarray
    mode_vectors: np.ndarray
    zero_point_lengths: np.ndarray
    ion_count: int = field(default=2)

    @classmethod
    def from_trap(cls, nu1: float, ion_mass: float = YB171_MASS) -> "IonCrystal":
        if ion_mass <= 0:
            raise InvalidParameterError(f"ion mass must be positive, got {ion_mass}")
        freqs, vectors = axial_modes(nu1)
        z0 = np.sqrt(constants.hbar / (2 * ion_mass * freqs))
        return cls(ion_mass, float(nu1), freqs, vectors, z0)

    def scaled(self, factor: float) -> "IonCrystal":
        """Crystal with the whole axial potential rescaled, nu_k -> factor * nu_k."""
        if factor <= 0:
            raise InvalidParameterError(f"trap frequency scale must be positive, got {factor}")
        return IonCrystal.from_trap(self.axial_com_freq * factor, self.ion_mass)


@dataclass(frozen=True)
class QubitParams:
    qubit_freqs: tuple[float, float]
    freq_gradient: tuple[float, float]
    rabi_freq: tuple[float, float]

    def __post_init__(self):
        if any(not (o > 0) for o in self.rabi_freq):
            raise InvalidParameterError(f"Rabi frequencies must be positive, got {self.rabi_freq}")
        if not np.all(np.isfinite(self.freq_gradient)):
            raise InvalidParameterError("frequency gradients must be finite")

    @classmethod
    def uniform(cls, rabi: float, sensitivity: float = ZEEMAN_SENSITIVITY,
                gradient: float = GRADIENT, qubit_freq: float = 2 * np.pi * 12.6e9) -> "QubitParams":
        g = sensitivity * gradient
        return cls((qubit_freq, qubit_freq), (g, g), (rabi, rabi))

    @property
    def pi_time(self) -> float:
        """Longest pi-pulse duration over the ions."""
        return float(np.pi / min(self.rabi_freq))


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    delta: np.ndarray  # rad/s, [ion, mode]

    def scaled(self, c: float) -> "CouplingMatrix":
        return CouplingMatrix(self.delta * c)


def coupling_constants(crystal: IonCrystal, qubits: QubitParams) -> CouplingMatrix:
    """Delta_jk = (1/2) * d(omega_j)/dz * b_jk * z0_k."""
    grad = np.asarray(qubits.freq_gradient, dtype=float)
    delta = 0.5 * grad[:, None] * crystal.mode_vectors * crystal.zero_point_lengths[None, :]
    return CouplingMatrix(delta)
