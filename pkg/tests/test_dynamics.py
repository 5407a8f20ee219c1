import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from axygate.designer import commensurate_tau
from axygate.dynamics import (GatePhase, accumulated_phase, displacement_alpha, displacements,
                              thermal_average, thermal_distribution, thermal_levels)
from axygate.errors import DegenerateModeError, DomainError, InvalidParameterError, TruncationError
from axygate.physics import CouplingMatrix
from axygate.sequence import AxyParams, PulseSchedule, build_axy

from oracles import (flip_schedule, quad_alpha, quad_phase, random_case,
                     worst_quadrature_errors)


def test_alpha_and_phi_match_quadrature_on_100_schedules():
    worst_a, worst_p = worst_quadrature_errors(100)
    assert worst_a <= 1e-9
    assert worst_p <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_phase_quadrature_property(seed):
    f1, f2, nus, delta, t_end = random_case(np.random.default_rng(seed))
    s = flip_schedule(f1, f2, t_end)
    phi = accumulated_phase(s, CouplingMatrix(delta), nus, t_end).phi
    q = sum(quad_phase(f1, f2, delta[0, k], delta[1, k], nus[k], t_end) for k in range(2))
    assert phi == pytest.approx(q, rel=1e-9, abs=1e-12)


def test_partial_window_matches_quadrature():
    f = np.array([0.2, 0.45, 0.7])
    s = flip_schedule(f, f, 1.0)
    full = displacement_alpha(s, 0, 0.3, 17.0, 1.0)
    head = displacement_alpha(s, 0, 0.3, 17.0, 0.5)
    tail = displacement_alpha(s, 0, 0.3, 17.0, 1.0, t_start=0.5)
    assert full == pytest.approx(head + tail, abs=1e-14)
    assert head == pytest.approx(quad_alpha(f[f < 0.5], 0.3, 17.0, 0.5), rel=1e-12)


def test_no_pulses_closed_form():
    s = PulseSchedule((), 2.0)
    nu, d = 3.0, 0.7
    a = displacement_alpha(s, 0, d, nu, 2.0)
    assert a == pytest.approx(-1j * d * (np.exp(2j * nu) - 1) / (1j * nu))


def test_free_phase_closed_form():
    # f = 1 throughout: Phi = 2 D1 D2 (nu t - sin nu t) / nu^2.
    s = PulseSchedule((), 1.3)
    cm = CouplingMatrix(np.array([[0.4, 0.0], [0.9, 0.0]]))
    phi = accumulated_phase(s, cm, [5.0, 1.0], 1.3).phi
    assert phi == pytest.approx(2 * 0.36 * (5 * 1.3 - np.sin(6.5)) / 25, rel=1e-12)


def test_commensurate_com_loop_closes(qubits, couplings, crystal):
    tau = commensurate_tau(crystal.axial_com_freq, 45)
    s = build_axy(AxyParams(tau, 31e-6, 90e-6, 4, 45), qubits)
    for n in (2, 4):
        a = displacements(s, couplings, crystal.mode_freqs, n * tau).alpha
        assert np.all(np.abs(a[:, 0]) < 1e-12 * np.abs(couplings.delta[:, 0]) * tau)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 5.0))
def test_coupling_scaling(c):
    f1, f2, nus, delta, t_end = random_case(np.random.default_rng(3))
    s = flip_schedule(f1, f2, t_end)
    cm = CouplingMatrix(delta)
    a0 = displacements(s, cm, nus, t_end).alpha
    a1 = displacements(s, cm.scaled(c), nus, t_end).alpha
    p0 = accumulated_phase(s, cm, nus, t_end).phi
    p1 = accumulated_phase(s, cm.scaled(c), nus, t_end).phi
    assert np.allclose(a1, c * a0, rtol=1e-12)
    assert p1 == pytest.approx(c * c * p0, rel=1e-10)


def test_identical_channels_symmetric_phase():
    f = np.array([0.1, 0.33, 0.6])
    s = flip_schedule(f, f, 1.0)
    cm = CouplingMatrix(np.array([[1.0, 0.5], [1.0, -0.5]]))
    swapped = CouplingMatrix(cm.delta[::-1])
    assert accumulated_phase(s, cm, [7.0, 12.0], 1.0).phi == pytest.approx(
        accumulated_phase(s, swapped, [7.0, 12.0], 1.0).phi, rel=1e-13)


def test_errors():
    s = flip_schedule(np.array([0.5]), np.array([0.5]), 1.0)
    with pytest.raises(DegenerateModeError):
        displacement_alpha(s, 0, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        displacement_alpha(s, 0, 1.0, 1.0, 1.5)
    with pytest.raises(DomainError):
        accumulated_phase(s, CouplingMatrix(np.ones((2, 2))), [1.0, 2.0], 0.5, t_start=0.7)


def test_observed_phase_doubles():
    assert GatePhase(np.pi / 4).phi_observed == pytest.approx(np.pi / 2)


@settings(max_examples=40)
@given(st.floats(0.0, 30.0))
def test_thermal_distribution_normalised(nbar):
    p = thermal_distribution(nbar)
    assert p.sum() == pytest.approx(1.0, abs=1e-6)
    assert np.sum(np.arange(p.size) * p) == pytest.approx(nbar, abs=1e-3 * (1 + nbar) ** 2)


def test_thermal_truncation():
    with pytest.raises(TruncationError) as exc:
        thermal_distribution(5.0, cutoff=10)
    assert exc.value.diagnostics["cutoff"] == 10
    with pytest.raises(InvalidParameterError):
        thermal_levels(-1.0)
    assert thermal_levels(0.0) == 1


def test_thermal_average_mean():
    assert thermal_average(lambda n: n, 2.0, tol=1e-12) == pytest.approx(2.0, rel=1e-9)
    both = thermal_average(lambda ns: ns[0] * ns[1], (1.0, 3.0), tol=1e-12)
    assert both == pytest.approx(3.0, rel=1e-8)
