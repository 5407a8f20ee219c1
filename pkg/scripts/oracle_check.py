"""Brute-force Fock evolution against the closed-form gate, for both pulse models."""
import argparse
import time
from pathlib import Path

from axygate.fock import FockConfig, oracle_equivalence

from _common import add_common_args, load_or_design


def main():
    ap = add_common_args(argparse.ArgumentParser(description=__doc__))
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[6, 10, 20])
    args = ap.parse_args()
    sol = load_or_design(args.solution, Path(args.out) / "solution.json")
    s = sol.schedule()
    for model in ("kick", "resolved"):
        for n in args.cutoffs:
            t0 = time.perf_counter()
            f = oracle_equivalence(s, sol.crystal, sol.couplings, FockConfig((n, n),
                                                                             pulse_model=model))
            print(f"{model:8s} cutoff {n:3d}: F = {f:.10f} ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
