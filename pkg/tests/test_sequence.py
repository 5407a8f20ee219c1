import numpy as np
import pytest
from hypothesis import given, strategies as st

from axygate.errors import DomainError, InvalidParameterError, ScheduleInfeasibleError
from axygate.sequence import (AXY_PHASES_X, AXY_PHASES_Y, AxyParams, Pulse, PulseSchedule,
                              apply_area_error, apply_timing_error, build_axy,
                              modulation_function, schedule_from_dict, schedule_to_dict)

TAU = 375e-6


@pytest.fixture
def params():
    return AxyParams(TAU, 30e-6, 100e-6, 4, 45)


def test_block_layout(params, qubits):
    s = build_axy(params, qubits, channels=(0,))
    assert len(s.pulses) == 20
    centers = s.flip_times(0)[:5]
    assert centers == pytest.approx([30e-6, 100e-6, TAU / 2, TAU - 100e-6, TAU - 30e-6])
    phases = [p.phase for p in s.pulses]
    assert phases[:5] == pytest.approx(AXY_PHASES_X)
    assert phases[5:10] == pytest.approx(AXY_PHASES_Y)
    assert s.total_time == pytest.approx(4 * TAU)


def test_block_symmetry(params, qubits):
    s = build_axy(params, qubits)
    t = np.linspace(1e-7, TAU - 1e-7, 996)  # avoids sampling exactly on a flip
    f = modulation_function(s, 0, t)
    assert np.array_equal(f, -modulation_function(s, 0, TAU - t))
    assert np.array_equal(modulation_function(s, 0, t + TAU), -f)


def test_modulation_edges(params, qubits):
    s = build_axy(params, qubits)
    assert modulation_function(s, 0, 0.0) == 1
    assert modulation_function(s, 0, 30e-6) == 1  # flips strictly after the center
    assert modulation_function(s, 0, 30e-6 + 1e-12) == -1
    with pytest.raises(DomainError):
        modulation_function(s, 0, -1e-9)


def test_param_validation():
    with pytest.raises(InvalidParameterError):
        AxyParams(TAU, 100e-6, 30e-6, 4)
    with pytest.raises(InvalidParameterError):
        AxyParams(TAU, 30e-6, 100e-6, 3)
    with pytest.raises(InvalidParameterError):
        AxyParams(TAU, 30e-6, TAU / 2, 4)


def test_overlap_detected(qubits):
    p = AxyParams(TAU, 20e-6, 25e-6, 2)
    with pytest.raises(ScheduleInfeasibleError) as exc:
        build_axy(p, qubits)
    assert exc.value.pair is not None


def test_touching_pulses_allowed():
    a = Pulse(1e-6, 2e-6, 0.0)
    b = Pulse(3e-6, 2e-6, 0.0)
    PulseSchedule((a, b), 4e-6)


def test_pulse_errors(params, qubits):
    s = build_axy(params, qubits)
    a = apply_area_error(s, -0.08)
    assert all(p.angle == pytest.approx(0.92 * np.pi) for p in a.pulses)
    assert [p.duration for p in a.pulses] == [p.duration for p in s.pulses]
    t = apply_timing_error(s, -0.3)
    assert all(p.angle == np.pi for p in t.pulses)
    assert t.pulses[0].duration == pytest.approx(s.pulses[0].duration / 0.7)
    assert np.array_equal(t.flip_times(1), s.flip_times(1))
    with pytest.raises(InvalidParameterError):
        apply_timing_error(s, -1.0)


def test_round_trip(params, qubits):
    s = build_axy(params, qubits)
    back = schedule_from_dict(schedule_to_dict(s))
    assert back == s
    assert back.params == s.params


@given(st.floats(0.05, 0.2), st.floats(0.25, 0.45), st.integers(1, 4))
def test_flip_count_even_per_gate(ua, ub, half_m):
    p = AxyParams(1.0, ua, ub, 2 * half_m)
    s = build_axy(p, _wide_rabi())
    assert modulation_function(s, 0, p.gate_time) == 1
    assert len(s.flip_times(0)) == 10 * half_m


def _wide_rabi():
    from axygate.physics import QubitParams
    return QubitParams.uniform(1e6)
