"""Synthetic Ramsey, Bell and robustness-sweep measurements of a designed gate.

Every protocol goes through a two-qubit process S (rho_out = S rho_in) with the
motion traced out.  The analytic path builds S from alpha_jk and Phi; the
oracle path propagates the Fock space and is the only one that sees pulse
errors.  Qubit 0 is the control, qubit 1 the target.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import spin
from .designer import GateSolution
from .dynamics import accumulated_phase, displacements
from .errors import InvalidParameterError, UnsupportedPathError
from .fock import FockConfig, brute_force_propagator, rotation_product
from .physics import IonCrystal, coupling_constants
from .sequence import PulseSchedule, apply_area_error, apply_timing_error

PATHS = ("auto", "analytic", "oracle")
AXES = ("nbar", "trap_freq_offset", "area_error", "timing_error")
BASES = ("x", "y", "z")
OUTCOMES = ("00", "01", "10", "11")
SWEEP_HEADER = ("axis", "value", "control_state", "contrast", "contrast_err", "phase_rad",
                "phase_err", "normalized_contrast", "normalized_phase")
# Second Ramsey pulse phase that turns the phase gate into a CNOT.
CNOT_PHASE = 3 * np.pi / 2
# Basis-change settings at the maximum (x) and minimum (y) of the parity curve.  With
# the gate exp(+i Phi sz sz) and the pulse handedness above, these sit at -pi/4 and
# -3pi/4, which equal 3pi/4 and pi/4 for the correlators.
BELL_ANALYSIS_PHASES = {"x": -np.pi / 4, "y": -3 * np.pi / 4}
PHASE_MATCH_TOL = 1e-3


def _identity_confusion():
    return (np.eye(2), np.eye(2))


@dataclass(frozen=True, eq=False)
class ErrorModel:
    nbar: tuple[float, float] = (0.0, 0.0)
    trap_freq_offset: float = 0.0
    area_error: float = 0.0
    timing_error: float = 0.0
    # confusion[q][true, read]: probability of reading `read` when qubit q is in `true`.
    readout_confusion: tuple = field(default_factory=_identity_confusion)

    def __post_init__(self):
        nbar = tuple(float(n) for n in np.broadcast_to(self.nbar, (2,)))
        object.__setattr__(self, "nbar", nbar)
        if any(n < 0 for n in nbar):
            raise InvalidParameterError(f"nbar must be >= 0, got {nbar}")
        if self.trap_freq_offset <= -1:
            raise InvalidParameterError("trap_freq_offset must exceed -1")
        if self.area_error <= -1 or self.timing_error <= -1:
            raise InvalidParameterError("pulse errors must exceed -1")
        conf = tuple(np.asarray(c, dtype=float) for c in self.readout_confusion)
        if len(conf) != 2 or any(c.shape != (2, 2) for c in conf):
            raise InvalidParameterError("readout_confusion needs one 2x2 matrix per qubit")
        for c in conf:
            if np.any(c < 0) or not np.allclose(c.sum(axis=1), 1.0, atol=1e-12):
                raise InvalidParameterError("confusion rows must be probabilities summing to 1")
        object.__setattr__(self, "readout_confusion", conf)

    @property
    def has_pulse_errors(self) -> bool:
        return self.area_error != 0 or self.timing_error != 0

    def with_axis(self, axis: str, value: float) -> "ErrorModel":
        if axis == "nbar":
            return replace(self, nbar=(float(value), self.nbar[1]))
        if axis in AXES:
            return replace(self, **{axis: float(value)})
        raise InvalidParameterError(f"unknown sweep axis {axis!r}; choose from {AXES}")


@dataclass(frozen=True, eq=False)
class FringeScan:
    phases: np.ndarray
    populations: np.ndarray
    control_state: int
    shots: int = 0

    def __post_init__(self):
        if np.any(np.diff(self.phases) <= 0):
            raise InvalidParameterError("fringe phases must be strictly increasing")
        if np.any((self.populations < 0) | (self.populations > 1)):
            raise InvalidParameterError("populations must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class BasisCounts:
    """Outcome record in the order 00, 01, 10, 11; probabilities when shots == 0."""
    basis: str
    counts: np.ndarray
    shots: int = 0

    def __post_init__(self):
        total = self.shots if self.shots > 0 else 1.0
        if not np.isclose(np.sum(self.counts), total, rtol=0, atol=1e-9):
            raise InvalidParameterError(f"counts sum {np.sum(self.counts)} != {total}")

    def as_dict(self) -> dict:
        return {k: (int(v) if self.shots else float(v)) for k, v in zip(OUTCOMES, self.counts)}


@dataclass(frozen=True)
class BellRun:
    counts: dict
    warnings: tuple = ()


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    control_state: int
    contrast: float
    contrast_err: float
    phase_rad: float
    phase_err: float
    normalized_contrast: float
    normalized_phase: float


def perturbed(solution: GateSolution, error: ErrorModel):
    """Schedule, crystal and couplings actually realised under the error model."""
    schedule = solution.schedule()
    if error.area_error:
        schedule = apply_area_error(schedule, error.area_error)
    if error.timing_error:
        schedule = apply_timing_error(schedule, error.timing_error)
    crystal = solution.crystal
    couplings = solution.couplings
    if error.trap_freq_offset:
        crystal = crystal.scaled(1 + error.trap_freq_offset)
        couplings = coupling_constants(crystal, solution.qubits)
    return schedule, crystal, couplings


def _coherence(beta, beta_p, nbar) -> complex:
    """Tr[D(beta) rho_th D(beta')^dag] for one mode."""
    return np.exp(1j * np.imag(np.conj(beta_p) * beta)
                  - abs(beta - beta_p) ** 2 * (nbar + 0.5))


def analytic_channel(schedule: PulseSchedule, crystal: IonCrystal, couplings,
                     nbar: Sequence[float]) -> np.ndarray:
    """Reduced two-qubit process of Q U_S U_C with thermal motion traced out."""
    T = schedule.total_time
    alpha = displacements(schedule, couplings, crystal.mode_freqs, T).alpha
    phi = accumulated_phase(schedule, couplings, crystal.mode_freqs, T).phi
    s = spin.SPIN_VALUES
    beta = s @ alpha  # [spin config, mode]
    m = np.empty((4, 4), dtype=complex)
    for a in range(4):
        for b in range(4):
            chi = np.prod([_coherence(beta[a, k], beta[b, k], nbar[k])
                           for k in range(beta.shape[1])])
            m[a, b] = np.exp(1j * phi * (s[a, 0] * s[a, 1] - s[b, 0] * s[b, 1])) * chi
    q = rotation_product(schedule)
    return np.einsum("ac,cd,bd->abcd", q, m, q.conj())


def gate_channel(solution: GateSolution, error: ErrorModel = ErrorModel(),
                 path: str = "auto", fock: FockConfig | None = None) -> np.ndarray:
    if path not in PATHS:
        raise InvalidParameterError(f"path must be one of {PATHS}")
    if path == "analytic" and error.has_pulse_errors:
        raise UnsupportedPathError("pulse area/timing errors need the oracle path")
    if path == "auto":
        path = "oracle" if error.has_pulse_errors else "analytic"
    schedule, crystal, couplings = perturbed(solution, error)
    if path == "analytic":
        return analytic_channel(schedule, crystal, couplings, error.nbar)
    base = fock or FockConfig(pulse_model="resolved")
    return brute_force_propagator(schedule, crystal, couplings,
                                  replace(base, thermal_nbar=error.nbar))


def _read(p1_true, confusion: np.ndarray, shots: int, rng) -> np.ndarray:
    """Target excitation after readout; shots > 0 samples true outcomes, then misreads."""
    if shots == 0:
        return p1_true * confusion[1, 1] + (1 - p1_true) * confusion[0, 1]
    ones = rng.binomial(shots, p1_true)
    read = rng.binomial(ones, confusion[1, 1]) + rng.binomial(shots - ones, confusion[0, 1])
    return read / shots


def default_phases(n: int = 24) -> np.ndarray:
    return np.linspace(0, 2 * np.pi, n, endpoint=False)


def ramsey_from_channel(channel: np.ndarray, control_state: int, phases, shots: int = 0,
                        confusion: np.ndarray = np.eye(2), rng=None) -> FringeScan:
    if control_state not in (0, 1):
        raise InvalidParameterError("control_state must be 0 or 1")
    if shots < 0:
        raise InvalidParameterError("shots must be >= 0")
    if shots and rng is None:
        raise InvalidParameterError("finite shots need a random generator")
    phases = np.asarray(phases, dtype=float)
    psi = np.kron(np.eye(2)[control_state], spin.rotation(np.pi / 2, 0) @ [1, 0])
    rho = spin.apply_channel(channel, spin.projector(psi))
    pops = np.empty(phases.size)
    for i, ph in enumerate(phases):
        u = spin.on_qubit(spin.rotation(np.pi / 2, ph), 1)
        p = spin.populations(spin.conjugate(rho, u))
        pops[i] = p[1] + p[3]
    pops = _read(np.clip(pops, 0, 1), confusion, shots, rng)
    return FringeScan(phases, pops, control_state, shots)


def simulate_ramsey(solution: GateSolution, control_state: int,
                    error: ErrorModel = ErrorModel(), phases=None, shots: int = 0,
                    rng=None, path: str = "auto", fock: FockConfig | None = None) -> FringeScan:
    """Target fringe P(target=1) vs the phase of the closing pi/2 pulse."""
    channel = gate_channel(solution, error, path, fock)
    phases = default_phases() if phases is None else phases
    return ramsey_from_channel(channel, control_state, phases, shots,
                               error.readout_confusion[1], rng)


def bell_probabilities(channel: np.ndarray, basis: str) -> np.ndarray:
    psi = np.kron(spin.HADAMARD @ [1, 0], spin.rotation(np.pi / 2, 0) @ [1, 0])
    rho = spin.apply_channel(channel, spin.projector(psi))
    rho = spin.conjugate(rho, spin.on_qubit(spin.rotation(np.pi / 2, CNOT_PHASE), 1))
    if basis in BELL_ANALYSIS_PHASES:
        rho = spin.conjugate(rho, spin.both(spin.rotation(np.pi / 2, BELL_ANALYSIS_PHASES[basis])))
    elif basis != "z":
        raise InvalidParameterError(f"basis must be one of {BASES}")
    p = spin.populations(rho)
    return p / p.sum()


def _confuse(p: np.ndarray, confusion) -> np.ndarray:
    return p @ np.kron(confusion[0], confusion[1])


def simulate_bell(solution: GateSolution, error: ErrorModel = ErrorModel(), shots: int = 0,
                  rng=None, path: str = "auto", fock: FockConfig | None = None) -> BellRun:
    notes = []
    if abs(solution.phi_achieved - np.pi / 4) > PHASE_MATCH_TOL:
        msg = (f"gate phase {solution.phi_achieved:.6f} rad is not pi/4; the Bell protocol "
               "assumes a CNOT-equivalent gate")
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    if shots and rng is None:
        raise InvalidParameterError("finite shots need a random generator")
    channel = gate_channel(solution, error, path, fock)
    out = {}
    for b in BASES:
        p = bell_probabilities(channel, b)
        if shots == 0:
            out[b] = BasisCounts(b, _confuse(p, error.readout_confusion), 0)
            continue
        true = rng.multinomial(shots, p)
        read = np.zeros(4, dtype=int)
        for i, n in enumerate(true):
            read += rng.multinomial(n, np.kron(error.readout_confusion[0],
                                               error.readout_confusion[1])[i])
        out[b] = BasisCounts(b, read, shots)
    return BellRun(out, tuple(notes))


def _point_rng(seed, index: int, control: int):
    return None if seed is None else np.random.default_rng([seed, index, control])


def sweep(solution: GateSolution, axis: str, grid, base: ErrorModel = ErrorModel(),
          shots: int = 0, seed: int | None = None, path: str = "auto",
          fock: FockConfig | None = None, phases=None, reference: float = 0.0) -> list[SweepRow]:
    """Fitted contrast and fringe phase along one error axis, both control states.

    Results are normalised to the point at `reference` on the same axis, which
    is simulated noiselessly even when it is not part of the grid.
    """
    from .analysis import fit_fringe

    if axis not in AXES:
        raise InvalidParameterError(f"unknown sweep axis {axis!r}; choose from {AXES}")
    if shots and seed is None:
        raise InvalidParameterError("a seed is required when shots > 0")
    phases = default_phases() if phases is None else phases
    ref_model = base.with_axis(axis, reference)
    ref_channel = gate_channel(solution, ref_model, path, fock)
    refs = {c: fit_fringe(ramsey_from_channel(ref_channel, c, phases, 0,
                                              ref_model.readout_confusion[1]))
            for c in (0, 1)}
    rows = []
    for i, value in enumerate(grid):
        model = base.with_axis(axis, value)
        channel = gate_channel(solution, model, path, fock)
        for c in (0, 1):
            scan = ramsey_from_channel(channel, c, phases, shots, model.readout_confusion[1],
                                       _point_rng(seed, i, c))
            fit = fit_fringe(scan)
            err = np.sqrt(np.clip(np.diag(fit.covariance), 0, None))
            rows.append(SweepRow(axis, float(value), c, fit.contrast, float(err[1]), fit.phase,
                                 float(err[2]), fit.contrast / refs[c].contrast,
                                 fit.phase / refs[c].phase))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([r.axis, repr(r.value), r.control_state]
                   + [repr(float(getattr(r, k))) for k in SWEEP_HEADER[3:]])
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[SweepRow]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
        raise InvalidParameterError(f"unexpected sweep header {reader.fieldnames}")
    return [SweepRow(d["axis"], float(d["value"]), int(d["control_state"]),
                     *(float(d[k]) for k in SWEEP_HEADER[3:])) for d in reader]
