"""Brute-force truncated-Fock propagation of two qubits and two axial modes.

The oracle never touches the modulation function.  Motion is evolved in the
lab frame, H = sum_k nu_k n_k + sum_jk Delta_jk sigma^z_j (a_k + a_k^dag),
which is piecewise constant between pulse boundaries, so every segment is an
exact exponential.  Pulses are either instantaneous rotations at their centers
("kick") or a carrier drive over their duration with the spin-motion coupling
still on ("resolved").  Final states are returned in the interaction picture
of the free motion, the frame in which alpha_jk and Phi are defined.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import spin
from .dynamics import accumulated_phase, displacements, thermal_distribution, thermal_levels
from .errors import InvalidParameterError, TruncationError
from .physics import CouplingMatrix, IonCrystal
from .sequence import PulseSchedule

PULSE_MODELS = ("kick", "resolved")


@dataclass(frozen=True)
class FockConfig:
    cutoff_per_mode: tuple[int, int] = (20, 20)
    integrator_step: float | None = None
    thermal_nbar: tuple[float, float] = (0.0, 0.0)
    pulse_model: str = "kick"
    leakage_tol: float = 1e-6
    headroom: int = 8

    def __post_init__(self):
        if self.pulse_model not in PULSE_MODELS:
            raise InvalidParameterError(f"pulse_model must be one of {PULSE_MODELS}")
        if any(c < 2 for c in self.cutoff_per_mode):
            raise InvalidParameterError("Fock cutoff must be at least 2 per mode")
        if any(nb < 0 for nb in self.thermal_nbar):
            raise InvalidParameterError("thermal_nbar must be >= 0")
        for c, nb in zip(self.cutoff_per_mode, self.thermal_nbar):
            if c < 5 * (nb + 1):
                warnings.warn(f"Fock cutoff {c} below 5*(nbar+1) for nbar={nb}; the space "
                              "is enlarged to cover the thermal support", stacklevel=2)

    def dims(self) -> tuple[int, int]:
        """Per-mode dimension: at least the cutoff, and enough to hold the thermal support."""
        return tuple(max(c, thermal_levels(nb) + self.headroom)
                     for c, nb in zip(self.cutoff_per_mode, self.thermal_nbar))


def _ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


class _Engine:
    """Applies free, kicked and driven segments to states shaped (2, 2, N1, N2, cols)."""

    def __init__(self, nus, delta, dims, tol):
        self.nus = np.asarray(nus, dtype=float)
        self.delta = np.asarray(delta, dtype=float)
        self.dims = dims
        self.tol = tol
        self._mode_eig = {}
        self._drive_eig = {}
        self.max_leak = 0.0

    def _mode_h(self, k: int, c: float) -> np.ndarray:
        a = _ladder(self.dims[k])
        return self.nus[k] * (a.conj().T @ a) + c * (a + a.conj().T)

    def _coupling(self, k: int, s1: float, s2: float) -> float:
        return self.delta[0, k] * s1 + self.delta[1, k] * s2

    def mode_unitary(self, k: int, s1: float, s2: float, d: float) -> np.ndarray:
        key = (k, s1, s2)
        if key not in self._mode_eig:
            self._mode_eig[key] = np.linalg.eigh(self._mode_h(k, self._coupling(k, s1, s2)))
        e, v = self._mode_eig[key]
        return (v * np.exp(-1j * e * d)) @ v.conj().T

    def free(self, psi: np.ndarray, d: float) -> np.ndarray:
        if d <= 0:
            return psi
        out = np.empty_like(psi)
        for i1, s1 in enumerate((1.0, -1.0)):
            for i2, s2 in enumerate((1.0, -1.0)):
                u1 = self.mode_unitary(0, s1, s2, d)
                u2 = self.mode_unitary(1, s1, s2, d)
                block = np.einsum("ij,jkc->ikc", u1, psi[i1, i2])
                out[i1, i2] = np.einsum("kl,jlc->jkc", u2, block)
        return out

    @staticmethod
    def kick(psi: np.ndarray, rot: np.ndarray, qubit: int) -> np.ndarray:
        return np.moveaxis(np.tensordot(rot, psi, axes=([1], [qubit])), 0, qubit)

    def _full_static(self) -> np.ndarray:
        n1, n2 = self.dims
        blocks = []
        for s1 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                h = (np.kron(self._mode_h(0, self._coupling(0, s1, s2)), np.eye(n2))
                     + np.kron(np.eye(n1), self._mode_h(1, self._coupling(1, s1, s2))))
                blocks.append(h)
        dim = n1 * n2
        h = np.zeros((4 * dim, 4 * dim), dtype=complex)
        for i, b in enumerate(blocks):
            h[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] = b
        return h

    def driven(self, psi: np.ndarray, drives: tuple, d: float) -> np.ndarray:
        """drives: tuple of (qubit, rabi, phase) acting together for duration d."""
        if drives not in self._drive_eig:
            h = self._full_static()
            motion = np.eye(self.dims[0] * self.dims[1])
            for qubit, rabi, phase in drives:
                h = h + np.kron(spin.on_qubit(0.5 * rabi * spin.drive_axis(phase), qubit), motion)
            self._drive_eig[drives] = np.linalg.eigh(h)
        e, v = self._drive_eig[drives]
        shape = psi.shape
        flat = psi.reshape(-1, shape[-1])
        flat = v @ (np.exp(-1j * e * d)[:, None] * (v.conj().T @ flat))
        return flat.reshape(shape)

    def check(self, psi: np.ndarray, t: float) -> None:
        edge = (np.sum(np.abs(psi[:, :, -1, :, :]) ** 2, axis=(0, 1, 2))
                + np.sum(np.abs(psi[:, :, :, -1, :]) ** 2, axis=(0, 1, 2)))
        leak = float(edge.max())
        self.max_leak = max(self.max_leak, leak)
        if leak > self.tol:
            raise TruncationError(
                f"population {leak:.3g} at the Fock cutoff at t={t:.6g} s "
                f"(dims {self.dims}); raise cutoff_per_mode",
                {"time": t, "population": leak, "dims": self.dims,
                 "column": int(edge.argmax())})


def _segments(schedule: PulseSchedule, model: str):
    """Yield ('free', t0, t1), ('kick', t, pulses) or ('drive', t0, t1, pulses)."""
    pulses = schedule.pulses
    if model == "kick" or all(p.duration == 0 for p in pulses):
        centers = sorted({p.center for p in pulses})
        t = 0.0
        for c in centers:
            yield ("free", t, c)
            yield ("kick", c, [p for p in pulses if p.center == c])
            t = c
        yield ("free", t, schedule.total_time)
        return
    bounds = sorted({0.0, schedule.total_time}
                    | {p.start for p in pulses} | {p.end for p in pulses})
    bounds = [b for b in bounds if 0.0 <= b <= schedule.total_time]
    kicks = [p for p in pulses if p.duration == 0]
    for t0, t1 in zip(bounds, bounds[1:]):
        for p in kicks:
            if p.center == t0:
                yield ("kick", t0, [p])
        mid = 0.5 * (t0 + t1)
        active = [p for p in pulses if p.duration > 0 and p.start <= mid < p.end]
        if active:
            yield ("drive", t0, t1, active)
        else:
            yield ("free", t0, t1)


def _substeps(t0: float, t1: float, step: float | None):
    if step is None or t1 - t0 <= step:
        return [t1 - t0]
    n = int(np.ceil((t1 - t0) / step))
    return [(t1 - t0) / n] * n


def evolve(schedule: PulseSchedule, crystal: IonCrystal, couplings: CouplingMatrix,
           config: FockConfig, psi0: np.ndarray) -> np.ndarray:
    """Propagate psi0 of shape (2, 2, N1, N2[, cols]) through the schedule."""
    dims = config.dims()
    squeeze = psi0.ndim == 4
    psi = psi0[..., None] if squeeze else psi0
    if psi.shape[:4] != (2, 2) + dims:
        raise InvalidParameterError(f"initial state shape {psi.shape[:4]} != {(2, 2) + dims}")
    psi = psi.astype(complex)
    eng = _Engine(crystal.mode_freqs, couplings.delta, dims, config.leakage_tol)
    step = config.integrator_step
    for seg in _segments(schedule, config.pulse_model):
        if seg[0] == "free":
            _, t0, t1 = seg
            t = t0
            for d in _substeps(t0, t1, step):
                psi = eng.free(psi, d)
                t += d
                eng.check(psi, t)
        elif seg[0] == "kick":
            for p in seg[2]:
                psi = eng.kick(psi, spin.rotation(p.angle, p.phase), p.channel)
        else:
            _, t0, t1, active = seg
            drives = tuple(sorted((p.channel, p.angle / p.duration, p.phase) for p in active))
            t = t0
            for d in _substeps(t0, t1, step):
                psi = eng.driven(psi, drives, d)
                t += d
                eng.check(psi, t)
    # Back to the interaction picture of the free motion.
    T = schedule.total_time
    ph1 = np.exp(1j * crystal.mode_freqs[0] * np.arange(dims[0]) * T)
    ph2 = np.exp(1j * crystal.mode_freqs[1] * np.arange(dims[1]) * T)
    psi = psi * ph1[None, None, :, None, None] * ph2[None, None, None, :, None]
    return psi[..., 0] if squeeze else psi


def _thermal_weights(config: FockConfig, dims) -> list[np.ndarray]:
    out = []
    for nb, d in zip(config.thermal_nbar, dims):
        p = np.zeros(d)
        q = thermal_distribution(nb, d - config.headroom if nb > 0 else d)
        p[:q.size] = q / q.sum()  # drop the truncated tail (< leakage_tol) exactly
        out.append(p)
    return out


def _column_process(schedule, crystal, couplings, config, weights) -> np.ndarray:
    dims = config.dims()
    p1, p2 = weights
    support = [(n1, n2, p1[n1] * p2[n2]) for n1 in np.flatnonzero(p1)
               for n2 in np.flatnonzero(p2)]
    cols = 4 * len(support)
    psi0 = np.zeros((2, 2) + dims + (cols,), dtype=complex)
    for i, (n1, n2, _) in enumerate(support):
        for c in range(4):
            psi0[c // 2, c % 2, n1, n2, 4 * i + c] = 1.0
    psi = evolve(schedule, crystal, couplings, config, psi0)
    w = np.array([w for _, _, w in support])
    psi = psi.reshape(4, dims[0] * dims[1], len(support), 4)  # out spin, motion, thermal, in spin
    return np.einsum("amnc,bmnd,n->abcd", psi, psi.conj(), w / w.sum())


def _is_flip_only(schedule: PulseSchedule, config: FockConfig) -> bool:
    return config.pulse_model == "kick" and all(p.angle == np.pi for p in schedule.pulses)


def _factorized_process(schedule, crystal, couplings, config, weights) -> np.ndarray:
    """Exact pi kicks keep each spin basis state definite, so the modes evolve independently.

    For every input spin state the full motional unitary of each mode is built
    from the same segment exponentials as evolve(); only the bookkeeping differs.
    """
    dims = config.dims()
    eng = _Engine(crystal.mode_freqs, couplings.delta, dims, config.leakage_tol)
    segs = list(_segments(schedule, "kick"))
    T = schedule.total_time
    frame = [np.exp(1j * crystal.mode_freqs[k] * np.arange(dims[k]) * T)[:, None]
             for k in range(2)]
    spins, amps, mats = [], [], []
    for c in range(4):
        bits = [c // 2, c % 2]
        amp = 1.0 + 0j
        w = [np.eye(dims[0], dtype=complex), np.eye(dims[1], dtype=complex)]
        for seg in segs:
            if seg[0] == "free":
                d = seg[2] - seg[1]
                if d <= 0:
                    continue
                s1, s2 = 1.0 - 2 * bits[0], 1.0 - 2 * bits[1]
                for k in range(2):
                    w[k] = eng.mode_unitary(k, s1, s2, d) @ w[k]
                    leak = float(np.max(np.abs(w[k][-1, np.flatnonzero(weights[k])]) ** 2))
                    eng.max_leak = max(eng.max_leak, leak)
                    if leak > config.leakage_tol:
                        raise TruncationError(
                            f"population {leak:.3g} at the Fock cutoff at t={seg[2]:.6g} s "
                            f"(dims {dims}); raise cutoff_per_mode",
                            {"time": seg[2], "population": leak, "dims": dims, "mode": k})
            else:
                for p in seg[2]:
                    b = bits[p.channel]
                    amp *= spin.rotation(p.angle, p.phase)[1 - b, b]
                    bits[p.channel] = 1 - b
        spins.append(2 * bits[0] + bits[1])
        amps.append(amp)
        mats.append([frame[k] * w[k] for k in range(2)])
    S = np.zeros((4, 4, 4, 4), dtype=complex)
    for c in range(4):
        for d in range(4):
            overlap = np.prod([np.einsum("mn,n,mn->", mats[c][k], weights[k],
                                         mats[d][k].conj()) for k in range(2)])
            S[spins[c], spins[d], c, d] = amps[c] * np.conj(amps[d]) * overlap
    return S


def brute_force_propagator(schedule: PulseSchedule, crystal: IonCrystal,
                           couplings: CouplingMatrix, config: FockConfig) -> np.ndarray:
    """Thermally averaged two-qubit process S with rho_out[a,b] = S[a,b,c,d] rho_in[c,d]."""
    weights = _thermal_weights(config, config.dims())
    if _is_flip_only(schedule, config):
        return _factorized_process(schedule, crystal, couplings, config, weights)
    return _column_process(schedule, crystal, couplings, config, weights)


def rotation_product(schedule: PulseSchedule) -> np.ndarray:
    """Two-qubit unitary of all pulses applied back to back with no motion."""
    u = [np.eye(2, dtype=complex), np.eye(2, dtype=complex)]
    for p in schedule.pulses:
        u[p.channel] = spin.rotation(p.angle, p.phase) @ u[p.channel]
    return np.kron(u[0], u[1])


def displacement_operator(beta: complex, n: int, pad: int = 30) -> np.ndarray:
    m = n + pad
    a = _ladder(m)
    return expm(beta * a.conj().T - np.conj(beta) * a)[:n, :n]


def analytic_state(schedule: PulseSchedule, crystal: IonCrystal, couplings: CouplingMatrix,
                   psi0: np.ndarray) -> np.ndarray:
    """Q U_S U_C psi0 from the closed-form alpha_jk and Phi (interaction picture)."""
    T = schedule.total_time
    alpha = displacements(schedule, couplings, crystal.mode_freqs, T).alpha
    phi = accumulated_phase(schedule, couplings, crystal.mode_freqs, T).phi
    dims = psi0.shape[2:4]
    out = np.zeros_like(psi0, dtype=complex)
    for idx, (s1, s2) in enumerate(spin.SPIN_VALUES):
        beta = alpha[0] * s1 + alpha[1] * s2
        d1 = displacement_operator(beta[0], dims[0])
        d2 = displacement_operator(beta[1], dims[1])
        block = psi0[idx // 2, idx % 2]
        out[idx // 2, idx % 2] = np.exp(1j * phi * s1 * s2) * (d1 @ block @ d2.T)
    q = rotation_product(schedule).reshape(2, 2, 2, 2)
    return np.einsum("abcd,cd...->ab...", q, out)


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a.ravel(), b.ravel())) ** 2
                 / (np.vdot(a.ravel(), a.ravel()).real * np.vdot(b.ravel(), b.ravel()).real))


def oracle_equivalence(schedule: PulseSchedule, crystal: IonCrystal, couplings: CouplingMatrix,
                       config: FockConfig, spin_state: np.ndarray | None = None) -> float:
    """Fidelity between brute-force evolution and the closed form, motion in |0,0>."""
    dims = config.dims()
    if spin_state is None:
        plus = np.array([1, 1]) / np.sqrt(2)
        spin_state = np.kron(plus, plus)
    psi0 = np.zeros((2, 2) + dims, dtype=complex)
    psi0[:, :, 0, 0] = np.asarray(spin_state).reshape(2, 2)
    brute = evolve(schedule, crystal, couplings, config, psi0)
    closed = analytic_state(schedule, crystal, couplings, psi0)
    return state_fidelity(brute, closed)

