"""Shared setup for the experiment scripts: reference parameters and a cached design."""
import json
from pathlib import Path

import numpy as np

from axygate.designer import DesignSpec, optimize_block, solution_from_dict, solution_to_dict
from axygate.physics import IonCrystal, QubitParams

NU1 = 2 * np.pi * 120e3
RABI = 2 * np.pi * 31e3


def reference_system():
    return IonCrystal.from_trap(NU1), QubitParams.uniform(RABI)


def load_or_design(path: str | None, cache: Path | None = None):
    crystal, qubits = reference_system()
    src = Path(path) if path else cache
    if src is not None and src.exists():
        return solution_from_dict(json.loads(src.read_text()), crystal, qubits)
    sol = optimize_block(DesignSpec(crystal, qubits))
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        cache.write_text(json.dumps(solution_to_dict(sol), indent=2, sort_keys=True))
    return sol


def add_common_args(parser, default_out="results"):
    parser.add_argument("--solution", help="solution JSON from `axygate design` (else designed here)")
    parser.add_argument("--out", default=default_out)
    return parser
