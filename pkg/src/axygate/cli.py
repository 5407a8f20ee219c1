"""Command-line front end: design, simulate, sweep and fit with reproducible file outputs."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (confusion_matrix, entanglement_report, fit_fringe, fit_nbar,
                       SidebandSpectrum)
from .config import TWO_PI, RunConfig, load_config
from .designer import DesignSpec, optimize_block, solution_from_dict, solution_to_dict
from .errors import (AxyError, ConfigError, DesignInfeasibleError, InvalidParameterError,
                     UnsupportedPathError)
from .experiments import (AXES, OUTCOMES, BasisCounts, ErrorModel, FringeScan, default_phases,
                          gate_channel, ramsey_from_channel, simulate_bell, sweep, sweep_csv)
from .fock import FockConfig

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4


def design_spec(cfg: RunConfig) -> DesignSpec:
    d = cfg["design"]
    return DesignSpec(cfg.crystal(), cfg.qubits(), d["target_phi_rad"], d["m"],
                      tuple(d["r_range"]), d["tolerance_alpha"], d["tolerance_phi"],
                      d["grid_points"], d["gap_factor"])


def error_model(cfg: RunConfig) -> ErrorModel:
    e = cfg["errors"]
    return ErrorModel(tuple(e["nbar"]), e["trap_freq_offset"], e["area_error"],
                      e["timing_error"], tuple(confusion_matrix(*f) for f in e["readout_fidelity"]))


def fock_config(cfg: RunConfig) -> FockConfig:
    run = cfg["run"]
    return FockConfig(cutoff_per_mode=tuple(run["fock_cutoff"]), pulse_model=run["pulse_model"])


def _meta(cfg: RunConfig) -> dict:
    return {"tool": "axygate", "version": __version__, "config_hash": cfg.hash}


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_banner(cfg: RunConfig) -> str:
    return f"# axygate {__version__} config_hash={cfg.hash}\n"


def write_outputs(files: dict[Path, str]) -> None:
    """Write every file through a temp file and rename, only after all contents exist."""
    staged = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _load_solution(cfg: RunConfig, path: str):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read solution ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc
    try:
        return solution_from_dict(data, cfg.crystal(), cfg.qubits())
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: not a gate solution file (missing {exc})") from exc


def _rng(cfg: RunConfig, stream: int):
    seed = cfg["run"]["seed"]
    return None if seed is None else np.random.default_rng([seed, stream])


def cmd_design(cfg: RunConfig, args) -> dict[Path, str]:
    sol = optimize_block(design_spec(cfg))
    out = Path(cfg["run"]["output_dir"])
    data = solution_to_dict(sol)
    data["meta"] = _meta(cfg)
    data["design"] = {"r": sol.params.r, "normalized_residuals": sol.normalized_residuals().tolist(),
                      "diagnostics": sol.diagnostics}
    schedule = {k: data[k] for k in ("header", "pulses")}
    schedule["meta"] = data["meta"]
    return {out / "solution.json": _json(data), out / "schedule.json": _json(schedule)}


def cmd_simulate(cfg: RunConfig, args) -> dict[Path, str]:
    sol = _load_solution(cfg, args.solution)
    err = error_model(cfg)
    run = cfg["run"]
    out = Path(run["output_dir"])
    shots = run["shots"]
    if args.protocol == "ramsey":
        channel = gate_channel(sol, err, run["path"], fock_config(cfg))
        phases = default_phases(run["phases"])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["control_state", "phase_rad", "population"])
        fits = {}
        for c in (0, 1):
            scan = ramsey_from_channel(channel, c, phases, shots, err.readout_confusion[1],
                                       _rng(cfg, c))
            for ph, p in zip(scan.phases, scan.populations):
                w.writerow([c, repr(float(ph)), repr(float(p))])
            fits[str(c)] = fit_fringe(scan).to_dict()
        fits["phase_difference_rad"] = fits["0"]["phase_rad"] - fits["1"]["phase_rad"]
        report = {"meta": _meta(cfg), "protocol": "ramsey", "shots": shots, "fits": fits}
        return {out / "ramsey.csv": _csv_banner(cfg) + buf.getvalue(),
                out / "ramsey_fit.json": _json(report)}
    bell = simulate_bell(sol, err, shots, _rng(cfg, 2), run["path"], fock_config(cfg))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["basis", *OUTCOMES, "shots"])
    for b, c in bell.counts.items():
        vals = [int(v) if shots else repr(float(v)) for v in c.counts]
        w.writerow([b, *vals, shots])
    report = json.loads(entanglement_report(bell.counts).to_json())
    report.update({"meta": _meta(cfg), "protocol": "bell", "shots": shots,
                   "warnings": list(bell.warnings)})
    return {out / "bell_counts.csv": _csv_banner(cfg) + buf.getvalue(),
            out / "entanglement.json": _json(report)}


def cmd_sweep(cfg: RunConfig, args) -> dict[Path, str]:
    if args.points < 1:
        raise InvalidParameterError("--points must be >= 1")
    sol = _load_solution(cfg, args.solution)
    run = cfg["run"]
    grid = np.linspace(args.start, args.stop, args.points)
    rows = sweep(sol, args.axis, grid, error_model(cfg), run["shots"], run["seed"], run["path"],
                 fock_config(cfg), default_phases(run["phases"]))
    out = Path(run["output_dir"])
    return {out / f"sweep_{args.axis}.csv": _csv_banner(cfg) + sweep_csv(rows)}


def _read_csv(path: str) -> list[dict]:
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read input ({exc.strerror})") from exc
    return list(csv.DictReader(lines))


def _need(rows: list[dict], columns, path):
    if not rows or any(c not in rows[0] for c in columns):
        raise ConfigError(f"{path}: expected columns {list(columns)}")


def _column(rows: list[dict], key: str, path, kind=float) -> np.ndarray:
    try:
        return np.array([kind(r[key]) for r in rows])
    except (TypeError, ValueError) as exc:
        line = next(i for i, r in enumerate(rows) if not _parses(r[key], kind)) + 2
        raise ConfigError(f"{path}: row {line}: bad {key} value {rows[line - 2][key]!r}") from exc


def _parses(text, kind) -> bool:
    try:
        kind(text)
    except (TypeError, ValueError):
        return False
    return True


def cmd_fit(cfg: RunConfig, args) -> dict[Path, str]:
    rows = _read_csv(args.input)
    out = Path(cfg["run"]["output_dir"])
    report = {"meta": _meta(cfg), "kind": args.kind, "input": Path(args.input).name}
    if args.kind == "fringe":
        _need(rows, ("control_state", "phase_rad", "population"), args.input)
        fits = {}
        controls = _column(rows, "control_state", args.input, int)
        for c in sorted(set(controls.tolist())):
            sel = [r for r, k in zip(rows, controls) if k == c]
            scan = FringeScan(_column(sel, "phase_rad", args.input),
                              _column(sel, "population", args.input), c)
            fits[str(c)] = fit_fringe(scan).to_dict()
        report["fits"] = fits
    elif args.kind == "bell":
        _need(rows, ("basis", *OUTCOMES, "shots"), args.input)
        counts = {}
        for r in rows:
            shots = int(_column([r], "shots", args.input, int)[0])
            vals = np.array([_column([r], k, args.input)[0] for k in OUTCOMES])
            counts[r["basis"]] = BasisCounts(r["basis"], vals, shots)
        if set(counts) != {"x", "y", "z"}:
            raise ConfigError(f"{args.input}: need one row per basis x, y, z")
        report.update(json.loads(entanglement_report(counts).to_json()))
    else:
        _need(rows, ("detuning_rad_s", "excitation"), args.input)
        if args.pulse_time is None or args.lamb_dicke is None:
            raise ConfigError("fit --kind nbar needs --pulse-time and --lamb-dicke")
        if args.shots < 0:
            raise ConfigError("--shots must be >= 0")
        crystal = cfg.crystal()
        eps = tuple(args.lamb_dicke)
        spectrum = SidebandSpectrum(_column(rows, "detuning_rad_s", args.input),
                                    _column(rows, "excitation", args.input),
                                    args.pulse_time, TWO_PI * cfg["qubits"]["rabi_freq_hz"], eps,
                                    tuple(crystal.mode_freqs[:len(eps)]), args.shots)
        nbar, sigma = fit_nbar(spectrum)
        report.update({"nbar": nbar, "nbar_err": sigma})
    stem = Path(args.input).stem
    return {out / f"fit_{args.kind}_{stem}.json": _json(report)}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="axygate", description=__doc__)
    p.add_argument("--version", action="version", version=f"axygate {__version__}")
    p.add_argument("--config", help="run configuration JSON (defaults when omitted)")
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--out", help="override run.output_dir")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("design", help="optimise AXY timings for the configured target phase")

    s = sub.add_parser("simulate", help="synthetic Ramsey or Bell measurement")
    s.add_argument("--solution", required=True)
    s.add_argument("--protocol", choices=("ramsey", "bell"), required=True)

    w = sub.add_parser("sweep", help="contrast and phase along one error axis")
    w.add_argument("--solution", required=True)
    w.add_argument("--axis", choices=AXES, required=True)
    w.add_argument("--from", dest="start", type=float, required=True)
    w.add_argument("--to", dest="stop", type=float, required=True)
    w.add_argument("--points", type=int, default=11)

    f = sub.add_parser("fit", help="analyse a fringe, Bell-count or sideband CSV")
    f.add_argument("--kind", choices=("fringe", "nbar", "bell"), required=True)
    f.add_argument("--input", required=True)
    f.add_argument("--pulse-time", type=float, help="sideband probe time in s (nbar)")
    f.add_argument("--lamb-dicke", type=float, nargs="+", help="per-mode factors (nbar)")
    f.add_argument("--shots", type=int, default=0,
                   help="shots per detuning; enables the binomial likelihood fit (nbar)")
    return p


COMMANDS = {"design": cmd_design, "simulate": cmd_simulate, "sweep": cmd_sweep, "fit": cmd_fit}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(seed=args.seed, output_dir=args.out)
        files = COMMANDS[args.command](cfg, args)
        write_outputs(files)
    except (ConfigError, InvalidParameterError, UnsupportedPathError) as exc:
        print(f"axygate: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DesignInfeasibleError as exc:
        print(f"axygate: design infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except AxyError as exc:
        print(f"axygate: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in sorted(files):
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
