"""Three-terminal junction with a flux: asymmetric transmissions, conserved current.

Usage::

    python3 scripts/flux_junction.py --phases 0 0.785 1.571
"""
import argparse

import numpy as np

from landauer.benchmarks import flux_junction, interior_grid
from landauer.scattering import build_coupling_space, scan
from landauer.transport import currents


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--phases", type=float, nargs="+", default=[0.0, np.pi / 4, np.pi / 2])
    p.add_argument("--points", type=int, default=200)
    args = p.parse_args()

    print(f"{'phase':>8} {'max|T12|^2-|T21|^2':>20} {'sum j':>12} {'max err':>10}  j")
    for phase in args.phases:
        spec = flux_junction(phase=phase)
        gap = 0.0
        for res in scan(spec, build_coupling_space(spec), interior_grid(spec, args.points)):
            if isinstance(res, Exception):
                continue
            t2 = np.abs(res.t_matrix) ** 2
            gap = max(gap, float(np.max(np.abs(t2 - t2.T))))
        rep = currents(spec)
        print(
            f"{phase:8.4f} {gap:20.3e} {rep.charge_currents.sum():12.2e} "
            f"{rep.charge_errors.max():10.1e}  {np.array2string(rep.charge_currents, precision=6)}"
        )


if __name__ == "__main__":
    main()
