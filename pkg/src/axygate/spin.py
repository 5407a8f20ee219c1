"""Two-qubit spin algebra shared by the oracle and the protocol simulations.

Basis order is |0>, |1> per qubit with sigma^z = diag(+1, -1), qubit 0 the
most significant index.  A carrier pulse of area theta and RF phase phi acts
as exp(-i theta/2 (cos(phi) sigma^x - sin(phi) sigma^y)), the rotating-wave
form of a drive cos(omega t - phi) sigma^x on H0 = omega sigma^z / 2.
"""
from __future__ import annotations

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

# sigma^z eigenvalue for each two-qubit basis index 0..3 (|00>, |01>, |10>, |11>).
SPIN_VALUES = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)


def drive_axis(phi: float) -> np.ndarray:
    return np.cos(phi) * SX - np.sin(phi) * SY


def rotation(theta: float, phi: float) -> np.ndarray:
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * drive_axis(phi)


def on_qubit(op: np.ndarray, qubit: int) -> np.ndarray:
    return np.kron(op, I2) if qubit == 0 else np.kron(I2, op)


def both(op: np.ndarray) -> np.ndarray:
    return np.kron(op, op)


def conjugate(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def ket(bits: str) -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    v[int(bits, 2)] = 1
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def apply_channel(superop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """rho_out[a, b] = sum_cd S[a, b, c, d] rho[c, d]."""
    return np.einsum("abcd,cd->ab", superop, rho)


def populations(rho: np.ndarray) -> np.ndarray:
    return np.clip(np.real(np.diag(rho)), 0.0, 1.0)
