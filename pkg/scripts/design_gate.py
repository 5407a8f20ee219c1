"""Design the pi/4 gate at r = 45 and scan r for the reachable phase window."""
import argparse
import json
import time
from pathlib import Path

import numpy as np

from axygate.designer import DesignSpec, optimize_block, solution_to_dict
from axygate.errors import DesignInfeasibleError

from _common import reference_system


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--scan", type=int, nargs=2, default=(28, 56), metavar=("LO", "HI"))
    ap.add_argument("--step", type=int, default=4)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    crystal, qubits = reference_system()

    t0 = time.perf_counter()
    sol = optimize_block(DesignSpec(crystal, qubits))
    p = sol.params
    print(f"r = {p.r}: tau = {p.tau * 1e6:.3f} us, tau_a = {p.tau_a * 1e6:.6f} us, "
          f"tau_b = {p.tau_b * 1e6:.6f} us, gate {sol.gate_time * 1e3:.3f} ms "
          f"({time.perf_counter() - t0:.1f} s)")
    print(f"Phi = {sol.phi_achieved:.12f} rad, normalised residuals "
          f"{np.array2string(sol.normalized_residuals(), precision=2)}")
    (out / "solution.json").write_text(json.dumps(solution_to_dict(sol), indent=2, sort_keys=True))

    rows = ["r,status,phi_rad,tau_a_s,tau_b_s,gate_time_s"]
    for r in range(args.scan[0], args.scan[1] + 1, args.step):
        spec = DesignSpec(crystal, qubits, r_range=(r, r), grid_points=120, n_refine=6)
        try:
            s = optimize_block(spec)
            status = "ok"
        except DesignInfeasibleError as exc:
            s, status = exc.best, "infeasible"
        if s is None:
            rows.append(f"{r},no-room,,,,")
        else:
            rows.append(f"{r},{status},{s.phi_achieved!r},{s.params.tau_a!r},{s.params.tau_b!r},"
                        f"{s.gate_time!r}")
        print(rows[-1])
    (out / "design_scan.csv").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
