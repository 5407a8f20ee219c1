"""Closed-form spin-dependent displacements and conditional phase of a pulse schedule.

In the toggling frame of instantaneous pi pulses the spin-motion Hamiltonian is

    H(t) = sum_jk f_j(t) sigma^z_j (Delta_jk a_k e^{-i nu_k t} + h.c.)

and its Magnus series stops at second order because the commutator of two
time slices is proportional to sigma^z_1 sigma^z_2 (times the identity on
motion).  The propagator is therefore exactly U_S U_C with

    alpha_jk(t) = -i Delta_jk int_0^t f_j(t') e^{i nu_k t'} dt'
    Phi(t) = sum_k Delta_1k Delta_2k int_0^t dt' int_0^t' dt''
             [f_1(t') f_2(t'') + f_2(t') f_1(t'')] sin(nu_k (t' - t''))

Both are evaluated piecewise-analytically over the constant-sign intervals.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateModeError, DomainError, InvalidParameterError, TruncationError
from .physics import CouplingMatrix
from .sequence import PulseSchedule

THERMAL_TAIL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class DisplacementState:
    alpha: np.ndarray  # complex, [ion, mode]
    time: float


@dataclass(frozen=True)
class GatePhase:
    phi: float

    @property
    def phi_observed(self) -> float:
        return 2 * self.phi


def _check_nu(nu: float) -> None:
    if nu == 0:
        raise DegenerateModeError("mode frequency is zero; displacement grows without bound")


def _cis_minus_linear(x):
    """exp(ix) - 1 - ix without cancellation for small x."""
    x = np.asarray(x, dtype=float)
    re = -2 * np.sin(x / 2) ** 2
    small = np.abs(x) < 1e-2
    xs = np.where(small, x, 0.0)
    series = -xs**3 / 6 + xs**5 / 120 - xs**7 / 5040
    im = np.where(small, series, np.sin(x) - x)
    return re + 1j * im


def _edges(flips: np.ndarray, t0: float, t1: float) -> np.ndarray:
    shape = flips.shape[:-1] + (1,)
    return np.concatenate([np.full(shape, t0), flips, np.full(shape, t1)], axis=-1)


def _alternating(n: int) -> np.ndarray:
    return 1.0 - 2.0 * (np.arange(n) % 2)


def alpha_integral(edges: np.ndarray, signs: np.ndarray, nu: float) -> np.ndarray:
    """int f(t) exp(i nu t) dt over the intervals [edges_i, edges_i+1] with sign signs_i."""
    ep = np.exp(1j * nu * edges)
    return np.sum(signs * (ep[..., 1:] - ep[..., :-1]), axis=-1) / (1j * nu)


def phase_integral(edges: np.ndarray, s_outer: np.ndarray, s_inner: np.ndarray,
                   nu: float) -> np.ndarray:
    """Im int dt' f_outer(t') e^{i nu t'} int_{t0}^{t'} dt'' f_inner(t'') e^{-i nu t''}."""
    ep = np.exp(1j * nu * edges)
    step = ep[..., 1:] - ep[..., :-1]
    e_plus = step / (1j * nu)
    e_minus = np.conj(step) / (-1j * nu)
    running = np.cumsum(s_inner * e_minus, axis=-1)
    before = np.concatenate([np.zeros_like(running[..., :1]), running[..., :-1]], axis=-1)
    own = -_cis_minus_linear(nu * np.diff(edges, axis=-1)) / nu**2
    return np.imag(np.sum(s_outer * before * e_plus + s_outer * s_inner * own, axis=-1))


def alpha_from_flips(flips: np.ndarray, nu: float, t_end: float) -> np.ndarray:
    """Vectorised int_0^t_end f e^{i nu t} for flip arrays of shape (..., n), f(0)=+1."""
    flips = np.asarray(flips, dtype=float)
    edges = _edges(flips, 0.0, t_end)
    return alpha_integral(edges, _alternating(edges.shape[-1] - 1), nu)


def phase_from_flips(flips: np.ndarray, nu: float, t_end: float) -> np.ndarray:
    """Vectorised 2 * phase_integral for both ions sharing one flip pattern."""
    flips = np.asarray(flips, dtype=float)
    edges = _edges(flips, 0.0, t_end)
    s = _alternating(edges.shape[-1] - 1)
    return 2 * phase_integral(edges, s, s, nu)


def _channel_signs(flips: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Sign of f on each interval between consecutive edges."""
    mids = 0.5 * (edges[1:] + edges[:-1])
    n = np.searchsorted(flips, mids, side="left")
    return 1.0 - 2.0 * (n % 2)


def _window(schedule: PulseSchedule, t: float, t_start: float) -> None:
    if not (0 <= t_start <= t <= schedule.total_time * (1 + 1e-12)):
        raise DomainError(f"need 0 <= t_start <= t <= {schedule.total_time}, got {t_start}, {t}")


def displacement_alpha(schedule: PulseSchedule, channel: int, delta: float, nu: float,
                       t: float, t_start: float = 0.0) -> complex:
    """alpha = -i Delta int_{t_start}^t f(t') exp(i nu t') dt'."""
    _check_nu(nu)
    _window(schedule, t, t_start)
    flips = schedule.flip_times(channel)
    inside = flips[(flips > t_start) & (flips < t)]
    edges = np.concatenate([[t_start], inside, [t]])
    signs = _channel_signs(flips, edges)
    return complex(-1j * delta * alpha_integral(edges, signs, nu))


def displacements(schedule: PulseSchedule, couplings: CouplingMatrix,
                  mode_freqs: Sequence[float], t: float, t_start: float = 0.0) -> DisplacementState:
    delta = couplings.delta
    alpha = np.array([[displacement_alpha(schedule, j, delta[j, k], mode_freqs[k], t, t_start)
                       for k in range(delta.shape[1])] for j in range(delta.shape[0])])
    return DisplacementState(alpha, t)


def accumulated_phase(schedule: PulseSchedule, couplings: CouplingMatrix,
                      mode_freqs: Sequence[float], t: float, t_start: float = 0.0) -> GatePhase:
    _window(schedule, t, t_start)
    f1, f2 = schedule.flip_times(0), schedule.flip_times(1)
    inside = np.union1d(f1, f2)
    inside = inside[(inside > t_start) & (inside < t)]
    edges = np.concatenate([[t_start], inside, [t]])
    s1, s2 = _channel_signs(f1, edges), _channel_signs(f2, edges)
    phi = 0.0
    for k, nu in enumerate(mode_freqs):
        _check_nu(nu)
        c = couplings.delta[0, k] * couplings.delta[1, k]
        if c == 0:
            continue
        phi += c * (phase_integral(edges, s1, s2, nu) + phase_integral(edges, s2, s1, nu))
    return GatePhase(float(phi))


def thermal_levels(nbar: float, tol: float = THERMAL_TAIL_TOL) -> int:
    """Smallest level count whose thermal tail mass is below tol."""
    if nbar < 0:
        raise InvalidParameterError(f"mean phonon number must be >= 0, got {nbar}")
    if nbar == 0:
        return 1
    q = nbar / (nbar + 1)
    return int(np.ceil(np.log(tol) / np.log(q) - 1e-12))


def thermal_distribution(nbar: float, cutoff: int | None = None,
                         tol: float = THERMAL_TAIL_TOL) -> np.ndarray:
    """p_n = nbar^n / (nbar+1)^(n+1) for n < cutoff; tail mass (nbar/(nbar+1))^cutoff."""
    if nbar < 0:
        raise InvalidParameterError(f"mean phonon number must be >= 0, got {nbar}")
    if cutoff is None:
        cutoff = thermal_levels(nbar, tol)
    n = np.arange(cutoff)
    if nbar == 0:
        return (n == 0).astype(float)
    q = nbar / (nbar + 1)
    tail = q**cutoff
    if tail > tol:
        raise TruncationError(f"thermal tail mass {tail:.3g} above {tol:g} with {cutoff} levels "
                              f"at nbar={nbar}", {"tail": tail, "cutoff": cutoff, "nbar": nbar})
    return q**n / (nbar + 1)


def thermal_average(evaluator: Callable, nbar, cutoff=None,
                    tol: float = THERMAL_TAIL_TOL):
    """Average evaluator(n) over independent thermal modes.

    With a scalar nbar the evaluator receives an int; with a sequence it
    receives a tuple of occupation numbers, one per mode.
    """
    scalar = np.ndim(nbar) == 0
    nbars = [nbar] if scalar else list(nbar)
    cutoffs = [cutoff] * len(nbars) if np.ndim(cutoff) == 0 else list(cutoff)
    dists = [thermal_distribution(nb, c, tol) for nb, c in zip(nbars, cutoffs)]
    supports = [np.flatnonzero(p) for p in dists]
    total = 0.0
    for ns in itertools.product(*supports):
        w = np.prod([p[n] for p, n in zip(dists, ns)])
        total = total + w * evaluator(int(ns[0]) if scalar else tuple(int(n) for n in ns))
    return total
