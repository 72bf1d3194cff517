"""Command-line frontend.

Exit codes: 0 success, 1 validation errors, 2 numerical failure,
3 I/O error or malformed config.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys
from itertools import combinations
from pathlib import Path

import numpy as np

from landauer.errors import ConfigError, ExceptionalEnergy, TransportError, ValidationError
from landauer.model import checked, load_config, spectral_intersection, validate
from landauer.oracle import ness_currents
from landauer.scattering import build_coupling_space, normality_residual, scan
from landauer.spectral import EDGE_MARGIN
from landauer.transport import QuadratureConfig, currents

CONVENTIONS = """\
Units and conventions
  hbar = 1; energies in the units of the config file; time in 1/energy.
  The electron charge is -e with e = `charge` from the config (e > 0).
  Leads: semi-infinite chains, H_j = onsite - hopping (|n><n+1| + h.c.), sites n >= 1.
  Coupling term: amplitude |left><right| + h.c., added to the Hamiltonian.
  Lead numbers are 1-based in configs and outputs.

  T(E): T_jk = <psi0_j, V psi+_k>, psi0 energy-normalized; S(E) = 1 - 2 pi i T(E).
  Transmission probability T_j_k = 4 pi^2 |T_jk|^2 = |S_jk|^2 (j != k).

  Charge current out of reservoir k (minus the rate of change of its charge):
      j_k   = -2 e pi int dE sum_j (f_k - f_j) |T_kj|^2          [e*energy]
  Energy current out of reservoir k:
      Phi_k = 2 pi int dE sum_j (f_k - f_j) E |T_kj|^2           [energy^2]
  (For N > 2 leads Phi_k is the direct extension of the two-lead formula.)
  NESS side: j_k(t) = i e Tr(rho(t)[V, P_k]), Phi_k(t) = -i Tr(rho(t)[V, P_k H0 P_k]),
  starting from decoupled reservoirs at their own (beta, mu) and an empty dot.
"""

CHARGE_UNIT = "e*energy"
ENERGY_UNIT = "energy^2"


class _Table:
    def __init__(self, command: str, columns: list[tuple[str, str]]):
        self.command = command
        self.columns = columns
        self.rows: list[list] = []

    def add(self, *values):
        self.rows.append(list(values))

    def render(self, fmt: str, header: bool) -> str:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        if fmt == "json":
            doc = {"command": self.command}
            if header:
                doc["generated"] = stamp
            doc["columns"] = [{"name": n, "unit": u} for n, u in self.columns]
            doc["rows"] = [[_json_value(v) for v in row] for row in self.rows]
            return json.dumps(doc, indent=2) + "\n"
        buf = io.StringIO()
        if header:
            buf.write(f"# landauer {self.command} generated {stamp}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"{n} [{u}]" for n, u in self.columns])
        for row in self.rows:
            w.writerow([_csv_value(v) for v in row])
        return buf.getvalue()


def _csv_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def _grid(args, spec) -> np.ndarray:
    lo = min(lead.band[0] for lead in spec.leads) if args.emin is None else args.emin
    hi = max(lead.band[1] for lead in spec.leads) if args.emax is None else args.emax
    if args.n < 2:
        raise ConfigError("--n: grid count must be at least 2")
    if args.emin is None and args.emax is None:
        # interior grid: drop the outermost band edges
        return np.linspace(lo, hi, args.n + 2)[1:-1]
    return np.linspace(lo, hi, args.n)


def _quad(args) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=args.quad_tol, budget=args.quad_budget, edge_margin=args.edge_margin)


def cmd_spectrum(spec, args) -> _Table:
    tab = _Table("spectrum", [("kind", "-"), ("leads", "-"), ("E_min", "energy"), ("E_max", "energy")])
    n = spec.n_leads
    for j, lead in enumerate(spec.leads):
        tab.add("band", str(j + 1), *lead.band)
    for r in range(2, n + 1):
        for group in combinations(range(n), r):
            label = "+".join(str(j + 1) for j in group)
            inter = spectral_intersection(spec, group)
            if inter:
                for lo, hi in inter:
                    tab.add("intersection", label, lo, hi)
            else:
                tab.add("intersection", label, math.nan, math.nan)
    return tab


def _pairs(n):
    return [(j, k) for j in range(n) for k in range(n) if j != k]


def cmd_transmission(spec, args) -> _Table:
    n = spec.n_leads
    cols = [("E", "energy")] + [(f"T_{j + 1}_{k + 1}", "1") for j, k in _pairs(n)]
    cols += [("unitarity_residual", "1"), ("optical_residual", "1"), ("status", "-")]
    tab = _Table("transmission", cols)
    space = build_coupling_space(spec)
    energies = _grid(args, spec)
    results = scan(spec, space, energies, workers=args.workers, edge_margin=args.edge_margin)
    for e, res in zip(energies, results):
        if isinstance(res, Exception):
            tab.add(e, *([math.nan] * (len(cols) - 2)), type(res).__name__)
            continue
        probs = [4.0 * np.pi**2 * abs(res.t_matrix[j, k]) ** 2 for j, k in _pairs(n)]
        tab.add(e, *probs, res.unitarity_residual, res.optical_residual, "ok")
    return tab


def cmd_smatrix_check(spec, args) -> _Table:
    cols = [
        ("points", "1"), ("skipped", "1"),
        ("max_unitarity_residual", "1"), ("E_at_max_unitarity", "energy"),
        ("max_optical_residual", "1"), ("E_at_max_optical", "energy"),
        ("max_normality_residual", "1"),
    ]
    tab = _Table("smatrix-check", cols)
    space = build_coupling_space(spec)
    energies = _grid(args, spec)
    results = scan(spec, space, energies, workers=args.workers, edge_margin=args.edge_margin)
    good = [r for r in results if not isinstance(r, Exception)]
    exceptional = sum(isinstance(r, ExceptionalEnergy) for r in results)
    if exceptional > len(results) // 2:
        raise ExceptionalEnergy(float("nan"), math.inf)
    if not good:
        tab.add(0, len(results), math.nan, math.nan, math.nan, math.nan, math.nan)
        return tab
    wu = max(good, key=lambda r: r.unitarity_residual)
    wo = max(good, key=lambda r: r.optical_residual)
    tab.add(
        len(good), len(results) - len(good),
        wu.unitarity_residual, wu.energy, wo.optical_residual, wo.energy,
        max(normality_residual(r) for r in good),
    )
    return tab


def cmd_current(spec, args, energy: bool = False) -> _Table:
    rep = currents(spec, _quad(args))
    name, unit = ("Phi", ENERGY_UNIT) if energy else ("j", CHARGE_UNIT)
    values = rep.energy_currents if energy else rep.charge_currents
    errors = rep.energy_errors if energy else rep.charge_errors
    tab = _Table("energy-current" if energy else "current",
                 [("lead", "-"), (name, unit), (f"{name}_error", unit)])
    for k in range(spec.n_leads):
        tab.add(str(k + 1), values[k], errors[k])
    tab.add("sum", float(values.sum()), float(errors.sum()))
    return tab


def cmd_ness_verify(spec, args) -> _Table:
    rep = currents(spec, _quad(args))
    ness = ness_currents(spec, L=args.lead_length, window=tuple(args.window), dt=args.dt)
    cols = [("lead", "-")]
    for name, unit in (("j", CHARGE_UNIT), ("Phi", ENERGY_UNIT)):
        cols += [
            (f"{name}_quadrature", unit), (f"{name}_quadrature_error", unit),
            (f"{name}_plateau", unit), (f"{name}_plateau_fluctuation", unit),
            (f"{name}_relative_deviation", "1"),
        ]
    cols += [("plateau_flagged", "-")]
    tab = _Table("ness-verify", cols)
    for k in range(spec.n_leads):
        row = [str(k + 1)]
        flagged = False
        for quad_v, quad_e, plat in (
            (rep.charge_currents[k], rep.charge_errors[k], ness.charge[k]),
            (rep.energy_currents[k], rep.energy_errors[k], ness.energy[k]),
        ):
            dev = abs(plat.value - quad_v) / abs(quad_v) if quad_v != 0 else math.nan
            row += [quad_v, quad_e, plat.value, plat.fluctuation, dev]
            flagged |= plat.flagged
        tab.add(*row, flagged)
    return tab


COMMANDS = {
    "spectrum": cmd_spectrum,
    "transmission": cmd_transmission,
    "smatrix-check": cmd_smatrix_check,
    "current": cmd_current,
    "energy-current": lambda spec, args: cmd_current(spec, args, energy=True),
    "ness-verify": cmd_ness_verify,
}


def _window(text: str) -> list[float]:
    try:
        t0, t1 = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected T1,T2") from None
    if not t1 > t0 >= 0:
        raise argparse.ArgumentTypeError("window must satisfy 0 <= T1 < T2")
    return [t0, t1]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="system description (JSON)")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--emin", type=float)
    common.add_argument("--emax", type=float)
    common.add_argument("--n", type=int, default=201, help="energy grid points")
    common.add_argument("--quad-tol", type=float, default=1e-9)
    common.add_argument("--quad-budget", type=int, default=2000)
    common.add_argument("--edge-margin", type=float, default=EDGE_MARGIN,
                        help="band-edge exclusion as a fraction of the bandwidth")
    common.add_argument("--lead-length", type=int, default=400)
    common.add_argument("--window", type=_window, default=[50.0, 150.0], metavar="T1,T2")
    common.add_argument("--dt", type=float, default=0.5)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--no-header", action="store_true", help="omit the timestamp header")

    parser = argparse.ArgumentParser(prog="landauer", description=__doc__.splitlines()[0])
    parser.add_argument("--conventions", action="store_true", help="print unit and sign conventions")
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.conventions:
        print(CONVENTIONS, end="")
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 3
    try:
        raw = load_config(args.config)
        report = validate(raw)
        for w in report.warnings:
            print(f"warning: {w}", file=sys.stderr)
        spec = checked(raw)
        table = COMMANDS[args.command](spec, args)
        text = table.render(args.format, header=not args.no_header)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    except ValidationError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TransportError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())
