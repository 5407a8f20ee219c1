"""Contrast and phase of the designed gate along every error axis."""
import argparse
from pathlib import Path

import numpy as np

from axygate.experiments import sweep, sweep_csv
from axygate.fock import FockConfig

from _common import add_common_args, load_or_design

GRIDS = {
    "nbar": ("analytic", np.array([0, 1, 2, 5, 10, 20, 50, 100], dtype=float)),
    "trap_freq_offset": ("analytic", np.linspace(-0.1, 0.1, 201)),
    "area_error": ("oracle", np.round(np.arange(-0.10, 0.101, 0.02), 2)),
    "timing_error": ("oracle", np.round(np.arange(-0.30, 0.151, 0.05), 2)),
}


def main():
    ap = add_common_args(argparse.ArgumentParser(description=__doc__))
    ap.add_argument("--cutoff", type=int, default=10, help="Fock levels per mode (oracle axes)")
    ap.add_argument("--axes", nargs="+", default=list(GRIDS))
    args = ap.parse_args()
    out = Path(args.out)
    sol = load_or_design(args.solution, out / "solution.json")
    fock = FockConfig((args.cutoff, args.cutoff), pulse_model="resolved")
    for axis in args.axes:
        path, grid = GRIDS[axis]
        rows = sweep(sol, axis, grid, path=path, fock=fock)
        (out / f"sweep_{axis}.csv").write_text(sweep_csv(rows))
        worst_c = min(rows, key=lambda r: r.normalized_contrast)
        worst_p = max(rows, key=lambda r: abs(r.normalized_phase - 1))
        print(f"{axis:17s} [{path}] min contrast {worst_c.normalized_contrast:.4f} at "
              f"{worst_c.value:+g}; max phase dev {abs(worst_p.normalized_phase - 1):.4f} at "
              f"{worst_p.value:+g} (control {worst_p.control_state})")


if __name__ == "__main__":
    main()
