"""Figures of merit from synthetic or measured records: fringes, Bell correlators, SPAM, thermometry."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.special import xlogy

from .dynamics import thermal_distribution, thermal_levels
from .errors import DegenerateFitError, FitFailureError, InvalidParameterError

OUTCOMES = ("00", "01", "10", "11")
PARITY = np.array([1.0, -1.0, -1.0, 1.0])


def wrap_phase(x: float) -> float:
    """Map onto (-pi, pi]."""
    y = np.mod(x + np.pi, 2 * np.pi) - np.pi
    return float(np.pi if y == -np.pi else y)


# -- Ramsey fringes ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FringeFit:
    offset: float
    contrast: float
    phase: float
    covariance: np.ndarray  # over (offset, contrast, phase)
    residual_rms: float

    @property
    def uncertainties(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    def to_dict(self) -> dict:
        err = self.uncertainties
        return {"offset": self.offset, "contrast": self.contrast, "phase_rad": self.phase,
                "offset_err": float(err[0]), "contrast_err": float(err[1]),
                "phase_err": float(err[2]), "residual_rms": self.residual_rms}


def fringe_model(phases, offset, contrast, phase):
    return offset + 0.5 * contrast * np.cos(np.asarray(phases) - phase)


def fit_fringe(scan) -> FringeFit:
    """Least-squares o + (C/2) cos(phi - phi0), seeded by the first Fourier component."""
    x = np.asarray(scan.phases, dtype=float)
    y = np.asarray(scan.populations, dtype=float)
    if x.size < 5 or x.max() - x.min() < np.pi * (1 - 1e-9):
        raise InvalidParameterError("fringe fit needs >= 5 phases spanning at least pi")
    if np.ptp(y) < 1e-12:
        raise DegenerateFitError("populations are constant; fringe phase is undefined")
    z = np.sum((y - y.mean()) * np.exp(-1j * x)) * 2 / x.size
    p0 = np.array([y.mean(), 2 * abs(z), -np.angle(z)])

    def resid(p):
        return fringe_model(x, *p) - y

    def jac(p):
        c, s = np.cos(x - p[2]), np.sin(x - p[2])
        return np.column_stack([np.ones_like(x), 0.5 * c, 0.5 * p[1] * s])

    res = least_squares(resid, p0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    o, c, ph = res.x
    if c < 0:
        c, ph = -c, ph + np.pi
    J = jac(np.array([o, c, ph]))
    dof = max(x.size - 3, 1)
    s2 = float(np.sum(res.fun ** 2)) / dof
    try:
        cov = np.linalg.inv(J.T @ J) * s2
    except np.linalg.LinAlgError as exc:
        raise DegenerateFitError("singular fringe Jacobian") from exc
    return FringeFit(float(o), float(c), wrap_phase(ph), cov,
                     float(np.sqrt(np.mean(res.fun ** 2))))


# -- Bell correlators -------------------------------------------------------------------------

def expectation_value(counts) -> tuple[float, float]:
    """<sigma_i sigma_i> = P00 + P11 - P01 - P10 and its multinomial standard error."""
    c = np.asarray(counts.counts, dtype=float)
    if counts.shots == 0:
        if not np.isclose(c.sum(), 1.0):
            raise InvalidParameterError("zero shots requires a probability vector")
        return float(PARITY @ c), 0.0
    p = c / counts.shots
    e = float(PARITY @ p)
    return e, float(np.sqrt(max(1 - e * e, 0.0) / counts.shots))


def _check_correlators(*vals):
    for v in vals:
        if not -1 - 1e-12 <= v <= 1 + 1e-12:
            raise InvalidParameterError(f"correlator {v} outside [-1, 1]")


def bell_fidelity(xx: float, yy: float, zz: float) -> tuple[float, bool]:
    """Overlap with (|00> + |11>)/sqrt(2); returns (F, clamped)."""
    _check_correlators(xx, yy, zz)
    f = (xx - yy + zz + 1) / 4
    clamped = not 0 <= f <= 1
    return float(min(max(f, 0.0), 1.0)), clamped


def negativity_bound(xx: float, yy: float, zz: float) -> float:
    """Lower bound log2+((1 + |xx| + |yy| + |zz|) / 2) on the logarithmic negativity."""
    _check_correlators(xx, yy, zz)
    return float(max(0.0, np.log2((1 + abs(xx) + abs(yy) + abs(zz)) / 2)))


@dataclass(frozen=True)
class EntanglementReport:
    xx: float
    yy: float
    zz: float
    fidelity: float
    neg_bound: float
    uncertainties: dict = field(default_factory=dict)
    fidelity_clamped: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def entanglement_report(counts: dict) -> EntanglementReport:
    """Counts keyed by basis x, y, z."""
    (xx, sx), (yy, sy), (zz, sz) = (expectation_value(counts[b]) for b in "xyz")
    f, clamped = bell_fidelity(xx, yy, zz)
    e = negativity_bound(xx, yy, zz)
    spread = np.sqrt(sx**2 + sy**2 + sz**2)
    s = abs(xx) + abs(yy) + abs(zz)
    e_err = spread / ((1 + s) * np.log(2)) if e > 0 else 0.0
    return EntanglementReport(xx, yy, zz, f, e,
                              {"xx": sx, "yy": sy, "zz": sz, "fidelity": spread / 4,
                               "neg_bound": float(e_err)}, clamped)


# -- readout errors ---------------------------------------------------------------------------

def confusion_matrix(dark_fidelity: float, bright_fidelity: float) -> np.ndarray:
    """Rows are the true state (0 dark, 1 bright), columns the reported state."""
    for f in (dark_fidelity, bright_fidelity):
        if not 0 <= f <= 1:
            raise InvalidParameterError(f"readout fidelity {f} outside [0, 1]")
    return np.array([[dark_fidelity, 1 - dark_fidelity], [1 - bright_fidelity, bright_fidelity]])


def _joint(confusions) -> np.ndarray:
    c0, c1 = (np.asarray(c, dtype=float) for c in confusions)
    return np.kron(c0, c1)


def spam_corrupt(probs, confusions) -> np.ndarray:
    return np.asarray(probs, dtype=float) @ _joint(confusions)


def spam_correct(freqs, confusions) -> tuple[np.ndarray, bool]:
    """Invert per-qubit readout confusion on a 4-outcome frequency vector."""
    m = _joint(confusions)
    if abs(np.linalg.det(m)) < 1e-12:
        raise InvalidParameterError("confusion matrix is singular")
    f = np.asarray(freqs, dtype=float)
    f = f / f.sum()
    p = np.linalg.solve(m.T, f)
    clipped = bool(np.any(p < -1e-12))  # ignore round-off
    if np.any(p < 0):
        p = np.clip(p, 0, None)
        p = p / p.sum()
    return p, clipped


# -- sideband thermometry ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SidebandSpectrum:
    detunings: np.ndarray  # rad/s
    excitation: np.ndarray
    pulse_time: float
    rabi: float
    lamb_dicke: tuple
    mode_freqs: tuple
    shots: int = 0
    fitted_nbar: float | None = None


def _rabi_line(rate, detuning, t):
    w2 = rate**2 + detuning**2
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(w2 > 0, rate**2 / w2 * np.sin(np.sqrt(w2) * t / 2) ** 2, 0.0)
    return out


def sideband_model(detunings, nbar, lamb_dicke, mode_freqs, rabi, pulse_time) -> np.ndarray:
    """Thermally averaged carrier plus first- and second-order sidebands of each mode."""
    d = np.asarray(detunings, dtype=float)[:, None]
    nbars = np.broadcast_to(np.asarray(nbar, dtype=float), (len(mode_freqs),))
    total = _rabi_line(np.full(1, rabi), d[:, 0], pulse_time)
    for nb, eps, nu in zip(nbars, lamb_dicke, mode_freqs):
        n = np.arange(thermal_levels(nb))
        p = thermal_distribution(nb, n.size)
        lines = [
            (-nu, rabi * eps * np.sqrt(n)),
            (nu, rabi * eps * np.sqrt(n + 1)),
            (-2 * nu, 0.5 * rabi * eps**2 * np.sqrt(n * np.clip(n - 1, 0, None))),
            (2 * nu, 0.5 * rabi * eps**2 * np.sqrt((n + 1) * (n + 2))),
        ]
        for center, rate in lines:
            total = total + _rabi_line(rate[None, :], d - center, pulse_time) @ p
    return np.clip(total, 0.0, 1.0)


def sideband_spectrum(nbar, lamb_dicke, rabi: float, pulse_time: float, detunings,
                      mode_freqs, shots: int = 0, rng=None) -> SidebandSpectrum:
    lamb_dicke = tuple(float(e) for e in np.atleast_1d(lamb_dicke))
    mode_freqs = tuple(float(v) for v in np.atleast_1d(mode_freqs))
    if len(lamb_dicke) != len(mode_freqs):
        raise InvalidParameterError("one Lamb-Dicke factor per mode")
    if any(not 0 <= e < 0.3 for e in lamb_dicke):
        raise InvalidParameterError("perturbative sideband rates need Lamb-Dicke factors < 0.3")
    if rabi <= 0 or pulse_time <= 0:
        raise InvalidParameterError("rabi and pulse_time must be positive")
    d = np.asarray(detunings, dtype=float)
    p = sideband_model(d, nbar, lamb_dicke, mode_freqs, rabi, pulse_time)
    if shots:
        if rng is None:
            raise InvalidParameterError("finite shots need a random generator")
        p = rng.binomial(shots, p) / shots
    return SidebandSpectrum(d, p, pulse_time, rabi, lamb_dicke, mode_freqs, shots)


def nbar_from_peak_ratio(red: float, blue: float) -> float:
    """Weak-pulse estimate: P_red / P_blue = nbar / (nbar + 1)."""
    r = red / blue
    if not 0 <= r < 1:
        raise InvalidParameterError(f"sideband ratio {r} outside [0, 1)")
    return r / (1 - r)


def fit_nbar(spectrum: SidebandSpectrum, mode: int = 0, fit_rabi: bool = False,
             max_nfev: int = 200) -> tuple[float, float]:
    """Least-squares thermal occupation of one mode; the others stay at the ground state."""
    k = len(spectrum.mode_freqs)

    def model(nb, rabi):
        nbars = np.zeros(k)
        nbars[mode] = nb
        return sideband_model(spectrum.detunings, nbars, spectrum.lamb_dicke,
                              spectrum.mode_freqs, rabi, spectrum.pulse_time)

    # Coarse scan seeds the local fit and keeps it off the wrong branch.
    grid = np.geomspace(0.02, 30, 40)
    costs = [np.sum((model(g, spectrum.rabi) - spectrum.excitation) ** 2) for g in grid]
    x0 = [grid[int(np.argmin(costs))]] + ([spectrum.rabi] if fit_rabi else [])

    shots = spectrum.shots
    y = spectrum.excitation

    def resid(x):
        m = model(x[0], x[1] if fit_rabi else spectrum.rabi)
        if not shots:
            return m - y
        # Signed binomial deviance residuals: least squares on these is the maximum likelihood fit.
        m = np.clip(m, 1e-12, 1 - 1e-12)
        dev = 2 * shots * (xlogy(y, y / m) + xlogy(1 - y, (1 - y) / (1 - m)))
        return np.sign(m - y) * np.sqrt(np.maximum(dev, 0.0))

    lower = [0.0] + ([0.5 * spectrum.rabi] if fit_rabi else [])
    upper = [200.0] + ([2 * spectrum.rabi] if fit_rabi else [])
    res = least_squares(resid, x0, bounds=(lower, upper), diff_step=1e-4, max_nfev=max_nfev)
    if not res.success:
        raise FitFailureError(f"nbar fit did not converge: {res.message}", float(res.x[0]))
    dof = max(res.fun.size - res.x.size, 1)
    s2 = float(np.sum(res.fun**2)) / dof
    try:
        cov = np.linalg.inv(res.jac.T @ res.jac) * s2
        sigma = float(np.sqrt(max(cov[0, 0], 0.0)))
    except np.linalg.LinAlgError:
        sigma = float("nan")
    return float(res.x[0]), sigma
