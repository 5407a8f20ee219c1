import json

import numpy as np
import pytest

from axygate.designer import (DesignSpec, commensurate_tau, evaluate_timing, optimize_block,
                              solution_from_dict, solution_report, solution_to_dict)
from axygate.dynamics import accumulated_phase, displacements
from axygate.errors import DesignInfeasibleError, InvalidParameterError
from axygate.fock import FockConfig
from axygate.physics import CouplingMatrix

NU1 = 2 * np.pi * 120e3


def test_commensurate_tau():
    assert commensurate_tau(NU1, 45) == pytest.approx(375e-6, rel=1e-12)
    assert commensurate_tau(NU1, 1) == pytest.approx(1 / 120e3)
    assert commensurate_tau(NU1, 90) == pytest.approx(2 * commensurate_tau(NU1, 45))


def test_solution_invariants(solution, design_spec):
    assert solution.gate_time == pytest.approx(6e-3, rel=1e-9)
    assert solution.params.r == 45
    assert np.all(solution.normalized_residuals() <= design_spec.tolerance_alpha)
    assert abs(solution.phi_achieved - np.pi / 4) <= design_spec.tolerance_phi


def test_solution_round_trips_through_dynamics(solution):
    s = solution.schedule()
    T = solution.gate_time
    phi = accumulated_phase(s, solution.couplings, solution.crystal.mode_freqs, T).phi
    alpha = displacements(s, solution.couplings, solution.crystal.mode_freqs, T).alpha
    assert phi == pytest.approx(solution.phi_achieved, abs=1e-12)
    assert np.allclose(alpha, solution.residual_alpha, atol=1e-15)


def test_respects_pulse_gaps(solution, design_spec):
    p = solution.params
    gaps = [2 * p.tau_a, p.tau_b - p.tau_a, p.tau / 2 - p.tau_b]
    assert min(gaps) >= design_spec.min_gap * (1 - 1e-9)


def test_json_round_trip(solution, crystal, qubits):
    data = json.loads(json.dumps(solution_to_dict(solution)))
    back = solution_from_dict(data, crystal, qubits)
    assert back.params == solution.params
    assert back.phi_achieved == solution.phi_achieved
    assert np.array_equal(back.residual_alpha, solution.residual_alpha)
    assert set(data["solution"]) == {"phi_target_rad", "phi_achieved_rad", "residual_alpha",
                                     "gate_time_s"}


def test_uncoupled_target_trivial_phase(crystal, qubits, couplings):
    delta = couplings.delta.copy()
    delta[1] = 0.0
    spec = DesignSpec(crystal, qubits, target_phi=0.0, grid_points=60, n_refine=4,
                      couplings=CouplingMatrix(delta))
    sol = optimize_block(spec)
    assert sol.phi_achieved == 0.0
    assert np.all(sol.normalized_residuals() <= 1e-3)


def test_unreachable_phase_reports_best(crystal, qubits):
    spec = DesignSpec(crystal, qubits, r_range=(28, 28), grid_points=60, n_refine=4)
    with pytest.raises(DesignInfeasibleError) as exc:
        optimize_block(spec)
    assert exc.value.best is not None
    assert exc.value.best.phi_achieved < np.pi / 4


def test_no_room_for_pulses(crystal, qubits):
    with pytest.raises(DesignInfeasibleError) as exc:
        optimize_block(DesignSpec(crystal, qubits, r_range=(3, 4), grid_points=40))
    assert exc.value.best is None


@pytest.mark.parametrize("kwargs", [
    {"target_phi": 4.0}, {"tolerance_alpha": 0.0}, {"m": 3}, {"r_range": (5, 4)},
    {"gap_factor": 0.5},
])
def test_spec_validation(crystal, qubits, kwargs):
    with pytest.raises(InvalidParameterError):
        DesignSpec(crystal, qubits, **kwargs)


def test_phase_scales_quadratically_with_coupling(design_spec, solution):
    spec2 = DesignSpec(design_spec.crystal, design_spec.qubits,
                       couplings=design_spec.couplings.scaled(1.3))
    p = solution.params
    again = evaluate_timing(spec2, p.r, p.tau_a, p.tau_b)
    assert again.phi_achieved == pytest.approx(1.69 * solution.phi_achieved, rel=1e-12)


def test_report(solution):
    grid = {"nbar": (0.0, 10.0), "trap_freq_offset": (-2e-4, -1e-4, 0.0, 1e-4, 2e-4),
            "area_error": (0.0,)}
    rep = solution_report(solution, grid, fock=FockConfig((6, 6), pulse_model="kick"))
    zero = [r for r in rep["trap_freq_offset"] if r.value == 0.0]
    assert all(r.normalized_contrast == pytest.approx(1.0) for r in zero)
    assert all(r.normalized_phase == pytest.approx(1.0) for r in zero)
    for c in (0, 1):
        rows = [r for r in rep["trap_freq_offset"] if r.control_state == c]
        dev = [abs(r.normalized_phase - 1) for r in rows]
        con = [r.contrast for r in rows]
        # Margins degrade monotonically away from the design point on both sides.
        assert dev[0] > dev[1] > dev[2] < dev[3] < dev[4]
        assert con[0] <= con[1] <= con[2] >= con[3] >= con[4]
    hot = [r for r in rep["nbar"] if r.value == 10.0]
    assert all(abs(r.normalized_contrast - 1) < 0.03 for r in hot)
    assert rep["area_error"][0].normalized_contrast == pytest.approx(1.0)
