import json
from pathlib import Path

import numpy as np
import pytest

from axygate import __version__
from axygate.cli import main, write_outputs
from axygate.config import load_config, validate
from axygate.designer import solution_to_dict
from axygate.errors import ConfigError

REFERENCE = Path(__file__).resolve().parents[1] / "configs" / "reference.json"


def _config(tmp_path, **sections):
    data = json.loads(REFERENCE.read_text())
    for name, values in sections.items():
        data[name].update(values)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def solution_file(tmp_path, solution):
    path = tmp_path / "solution.json"
    path.write_text(json.dumps(solution_to_dict(solution)))
    return str(path)


# -- config -----------------------------------------------------------------------------------

def test_defaults_validate():
    cfg = load_config(None)
    assert cfg["design"]["m"] == 16
    assert len(cfg.hash) == 16


def test_reference_config_hash_stable():
    assert load_config(REFERENCE).hash == load_config(REFERENCE).hash


@pytest.mark.parametrize("data, field", [
    ({"crystal": {"axial_com_freq_hz": -1.0}}, "crystal.axial_com_freq_hz"),
    ({"design": {"m": 3}}, "design.m"),
    ({"run": {"shots": 100}}, "run.seed"),
    ({"run": {"path": "exact"}}, "run.path"),
    ({"errors": {"nbar": [1.0]}}, "errors.nbar"),
    ({"qubits": {"rabi": 1.0}}, "config.qubits"),
    ({"design": {"r_range": [5, 2]}}, "design.r_range"),
])
def test_validation_names_the_field(data, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        validate(data)


def test_json_error_reports_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"run": {\n  "shots": 10,\n}}')
    with pytest.raises(ConfigError, match=r"bad\.json:3:1"):
        load_config(bad)


# -- commands ---------------------------------------------------------------------------------

def test_design_command(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--config", str(REFERENCE), "--out", str(out), "design"]) == 0
    data = json.loads((out / "solution.json").read_text())
    assert data["solution"]["gate_time_s"] == pytest.approx(6e-3, rel=1e-9)
    assert data["meta"] == {"tool": "axygate", "version": __version__,
                            "config_hash": load_config(REFERENCE).hash}
    sched = json.loads((out / "schedule.json").read_text())
    assert len(sched["pulses"]) == 2 * 5 * 16


def test_simulate_ramsey_phase(tmp_path, solution_file):
    out = tmp_path / "r"
    assert main(["--config", str(REFERENCE), "--out", str(out), "simulate", "--solution",
                 solution_file, "--protocol", "ramsey"]) == 0
    fit = json.loads((out / "ramsey_fit.json").read_text())
    assert fit["fits"]["0"]["phase_rad"] == pytest.approx(np.pi / 2, abs=1e-8)
    assert fit["meta"]["version"] == __version__
    assert (out / "ramsey.csv").read_text().startswith("# axygate ")


def test_outputs_byte_identical(tmp_path, solution_file):
    cfg = _config(tmp_path, run={"shots": 300, "seed": 11})
    texts = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["--config", cfg, "--out", str(out), "simulate", "--solution",
                     solution_file, "--protocol", "bell"]) == 0
        assert main(["--config", cfg, "--out", str(out), "sweep", "--solution", solution_file,
                     "--axis", "nbar", "--from", "0", "--to", "4", "--points", "3"]) == 0
        texts.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert texts[0] == texts[1]
    assert set(texts[0]) == {"bell_counts.csv", "entanglement.json", "sweep_nbar.csv"}


def test_seed_changes_counts(tmp_path, solution_file):
    cfg = _config(tmp_path, run={"shots": 300})
    for seed in ("1", "2"):
        assert main(["--config", cfg, "--seed", seed, "--out", str(tmp_path / seed), "simulate",
                     "--solution", solution_file, "--protocol", "bell"]) == 0
    a = (tmp_path / "1" / "bell_counts.csv").read_text()
    b = (tmp_path / "2" / "bell_counts.csv").read_text()
    assert a != b


def test_fit_round_trips(tmp_path, solution_file):
    out = tmp_path / "o"
    args = ["--config", str(REFERENCE), "--out", str(out)]
    assert main(args + ["simulate", "--solution", solution_file, "--protocol", "bell"]) == 0
    assert main(args + ["fit", "--kind", "bell", "--input", str(out / "bell_counts.csv")]) == 0
    rep = json.loads((out / "fit_bell_bell_counts.json").read_text())
    assert rep["fidelity"] == pytest.approx(1.0, abs=1e-9)
    assert main(args + ["simulate", "--solution", solution_file, "--protocol", "ramsey"]) == 0
    assert main(args + ["fit", "--kind", "fringe", "--input", str(out / "ramsey.csv")]) == 0
    rep = json.loads((out / "fit_fringe_ramsey.json").read_text())
    assert rep["fits"]["1"]["phase_rad"] == pytest.approx(-np.pi / 2, abs=1e-8)


def test_fit_nbar_command(tmp_path):
    from axygate.analysis import sideband_spectrum
    nu = 2 * np.pi * 120e3
    rabi = 2 * np.pi * 31e3
    t = np.pi / (rabi * 0.1)
    d = np.concatenate([c + np.linspace(-12 * np.pi / t, 12 * np.pi / t, 101)
                        for c in (-2 * nu, -nu, nu, 2 * nu)])
    sp = sideband_spectrum(1.5, [0.1], rabi, t, d, [nu])
    csv_path = tmp_path / "spec.csv"
    csv_path.write_text("detuning_rad_s,excitation\n"
                        + "".join(f"{float(x)!r},{float(y)!r}\n"
                                for x, y in zip(sp.detunings, sp.excitation)))
    args = ["--out", str(tmp_path), "fit", "--kind", "nbar", "--input", str(csv_path)]
    assert main(args) == 2  # probe parameters missing
    assert main(args + ["--pulse-time", repr(t), "--lamb-dicke", "0.1"]) == 0
    rep = json.loads((tmp_path / "fit_nbar_spec.json").read_text())
    assert rep["nbar"] == pytest.approx(1.5, rel=1e-6)


def test_fit_bad_number_reports_row(tmp_path, capsys):
    path = tmp_path / "scan.csv"
    path.write_text("control_state,phase_rad,population\n0,0.0,0.5\n0,abc,0.4\n")
    assert main(["--out", str(tmp_path), "fit", "--kind", "fringe", "--input", str(path)]) == 2
    assert "row 3" in capsys.readouterr().err


# -- failures ---------------------------------------------------------------------------------

def test_exit_code_config(tmp_path, capsys):
    cfg = _config(tmp_path, design={"m": 5})
    assert main(["--config", cfg, "design"]) == 2
    assert "design.m" in capsys.readouterr().err


def test_exit_code_infeasible(tmp_path):
    cfg = _config(tmp_path, design={"r_range": [3, 4], "grid_points": 40})
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out), "design"]) == 3
    assert not out.exists()


@pytest.mark.filterwarnings("ignore:Fock cutoff")
def test_exit_code_numerical(tmp_path, solution_file, capsys):
    cfg = _config(tmp_path, crystal={"gradient_t_per_m": 4000.0},
                  run={"path": "oracle", "fock_cutoff": [2, 2], "pulse_model": "kick"})
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out), "simulate", "--solution", solution_file,
                 "--protocol", "ramsey"]) == 4
    assert "Fock cutoff" in capsys.readouterr().err
    assert not out.exists()


def test_missing_solution_file(tmp_path, capsys):
    assert main(["--out", str(tmp_path / "o"), "simulate", "--solution",
                 str(tmp_path / "nope.json"), "--protocol", "ramsey"]) == 2
    assert "nope.json" in capsys.readouterr().err


def test_write_outputs_is_all_or_nothing(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    files = {tmp_path / "a.txt": "a", blocker / "b.txt": "b"}
    with pytest.raises(OSError):
        write_outputs(files)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["blocker"]
