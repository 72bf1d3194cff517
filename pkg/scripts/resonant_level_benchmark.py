"""Compare quadrature currents with the time-evolved plateau on the resonant level.

Usage::

    python3 scripts/resonant_level_benchmark.py --lengths 200 400 800 --trace trace.csv
"""
import argparse
import time
import warnings

from landauer.benchmarks import resonant_level
from landauer.errors import RecurrenceHorizonExceeded
from landauer.oracle import ness_currents
from landauer.transport import currents


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--level", type=float, default=0.2)
    p.add_argument("--coupling", type=float, default=0.4)
    p.add_argument("--beta", type=float, default=50.0)
    p.add_argument("--mus", type=float, nargs=2, default=(0.3, -0.3))
    p.add_argument("--lengths", type=int, nargs="+", default=[400])
    p.add_argument("--window", type=float, nargs=2, default=(50.0, 150.0))
    p.add_argument("--trace", help="write the time trace of the longest run as CSV")
    args = p.parse_args()

    spec = resonant_level(args.level, args.coupling, beta=args.beta, mus=args.mus)
    t0 = time.perf_counter()
    lb = currents(spec)
    print(f"quadrature ({time.perf_counter() - t0:.2f}s, {lb.grid_metadata['evaluations']} evaluations)")
    print(f"  j   = {lb.charge_currents}  +- {lb.charge_errors}")
    print(f"  Phi = {lb.energy_currents}  +- {lb.energy_errors}")

    res = None
    for L in args.lengths:
        t0 = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RecurrenceHorizonExceeded)
            res = ness_currents(spec, L=L, window=tuple(args.window))
        j, phi = res.charge[0], res.energy[0]
        note = " (window past recurrence horizon)" if caught else ""
        print(
            f"L={L:5d} ({time.perf_counter() - t0:.2f}s){note}\n"
            f"  j_1   = {j.value:.12g} +- {j.fluctuation:.1e}  rel dev {abs(j.value / lb.charge_currents[0] - 1):.2e}\n"
            f"  Phi_1 = {phi.value:.12g} +- {phi.fluctuation:.1e}  rel dev {abs(phi.value / lb.energy_currents[0] - 1):.2e}"
        )
    if args.trace and res is not None:
        with open(args.trace, "w") as fh:
            fh.write(res.trace.to_csv())


if __name__ == "__main__":
    main()
