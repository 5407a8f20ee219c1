"""Independent numerical oracles shared by the property tests and the acceptance run."""
import numpy as np

from axygate.dynamics import accumulated_phase, displacements
from axygate.physics import CouplingMatrix
from axygate.sequence import Pulse, PulseSchedule

def _gl(a, b, nu):
    n = 24 + int(np.ceil(abs(nu) * (b - a)))
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _pieces(flips, t_end):
    edges = np.concatenate([[0.0], flips, [t_end]])
    return [(edges[i], edges[i + 1], 1.0 - 2.0 * (i % 2)) for i in range(len(edges) - 1)]


def quad_alpha(flips, delta, nu, t_end):
    total = 0j
    for a, b, s in _pieces(flips, t_end):
        x, w = _gl(a, b, nu)
        total += s * np.sum(w * np.exp(1j * nu * x))
    return -1j * delta * total


def _inner(flips, nu, x):
    """int_0^x f(t'') sin(nu (x - t'')) dt'' for every outer node in x."""
    total = np.zeros_like(x)
    for a, b, s in _pieces(flips, x.max()):
        n = 24 + int(np.ceil(nu * (b - a)))
        u, w = np.polynomial.legendre.leggauss(n)
        hi = np.clip(x, a, b)[:, None]
        t = a + (hi - a) * (u + 1) / 2
        total += s * np.sum(w * np.sin(nu * (x[:, None] - t)), axis=1) * (hi[:, 0] - a) / 2
    return total


def quad_phase(f1, f2, d1, d2, nu, t_end):
    """Nested Gauss-Legendre over the double integral defining Phi for one mode."""
    xs, ws, s1s, s2s = [], [], [], []
    for a, b, _ in _pieces(np.union1d(f1, f2), t_end):
        x, w = _gl(a, b, nu)
        mid = 0.5 * (a + b)
        xs.append(x)
        ws.append(w)
        s1s.append(np.full(x.size, 1.0 - 2.0 * (np.searchsorted(f1, mid) % 2)))
        s2s.append(np.full(x.size, 1.0 - 2.0 * (np.searchsorted(f2, mid) % 2)))
    x, w, s1, s2 = (np.concatenate(v) for v in (xs, ws, s1s, s2s))
    return d1 * d2 * np.sum(w * (s1 * _inner(f2, nu, x) + s2 * _inner(f1, nu, x)))


def flip_schedule(f1, f2, t_end):
    pulses = [Pulse(t, 0.0, 0.0, np.pi, 0) for t in f1] + [Pulse(t, 0.0, 0.0, np.pi, 1) for t in f2]
    return PulseSchedule(tuple(pulses), t_end)


def random_case(rng):
    t_end = 1.0
    f1 = np.sort(rng.uniform(0.01, 0.99, rng.integers(1, 9)))
    f2 = np.sort(rng.uniform(0.01, 0.99, rng.integers(1, 9)))
    nus = np.sort(rng.uniform(2.0, 40.0, 2))
    delta = rng.normal(size=(2, 2))
    return f1, f2, nus, delta, t_end



def worst_quadrature_errors(n: int = 100, seed: int = 20240611) -> tuple[float, float]:
    """Largest relative alpha and Phi errors of the closed forms over n random schedules."""
    rng = np.random.default_rng(seed)
    worst_a = worst_p = 0.0
    for _ in range(n):
        f1, f2, nus, delta, t_end = random_case(rng)
        s = flip_schedule(f1, f2, t_end)
        cm = CouplingMatrix(delta)
        alpha = displacements(s, cm, nus, t_end).alpha
        for j, flips in enumerate((f1, f2)):
            for k in range(2):
                q = quad_alpha(flips, delta[j, k], nus[k], t_end)
                worst_a = max(worst_a, abs(alpha[j, k] - q) / abs(q))
        phi = accumulated_phase(s, cm, nus, t_end).phi
        q = sum(quad_phase(f1, f2, delta[0, k], delta[1, k], nus[k], t_end) for k in range(2))
        worst_p = max(worst_p, abs(phi - q) / abs(q))
    return worst_a, worst_p
