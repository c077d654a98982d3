"""
TuringFlow
==========

Command-line entry point. Builds Turing-complete stationary Euler and
Navier-Stokes flows on the flat 3-torus from a Turing machine or a
Hamiltonian isotopy, and verifies the result numerically.

Subcommands:
- tm-run, tm-encode, shift-orbit, equiv
- disk-map, suspend, return-map, gauge
- build, verify

Usage:
    python app.py build descriptors/build_rotation.json --out out/
"""

import sys
from pathlib import Path

# Add src directory to Python path
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

from ui.cli import main  # noqa: E402

if __name__ == "__main__":
    raise SystemExit(main())
