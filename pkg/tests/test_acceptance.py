"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured value
and the tolerance, visible even without ``-s``::

    python3 -m pytest tests/test_acceptance.py -v
"""
import time

import numpy as np
import pytest
from scipy.linalg import solve_banded

from landauer.benchmarks import flux_junction, interior_grid, perfect_chain, random_system, resonant_level
from landauer.model import LeadSpec, checked
from landauer.oracle import chain_transmission, ness_currents
from landauer.scattering import build_coupling_space, scan, transmission_probability
from landauer.spectral import band_point, eigenfunction, lead_green
from landauer.transport import currents


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok

    return emit


def test_criterion_1_quadrature_matches_ness(report):
    spec = resonant_level()
    start = time.perf_counter()
    lb = currents(spec)
    ness = ness_currents(spec, L=400)
    elapsed = time.perf_counter() - start
    devs = [abs(p.value - q) / abs(q) for p, q in zip(ness.charge, lb.charge_currents)]
    ok = max(devs) < 0.01 and elapsed < 120
    assert report(
        "1 LB vs NESS (L=400)", ok,
        f"j_LB={lb.charge_currents[0]:.10g} j_NESS={ness.charge[0].value:.10g} "
        f"max rel dev={max(devs):.2e} (tol 1e-2), runtime {elapsed:.1f}s (tol 120s)",
    )


def _random_family():
    rng = np.random.default_rng(20240601)
    return [checked(random_system(rng, n_leads=2 + (i // 4) % 2, dot_dim=i % 4)) for i in range(20)]


def _family_worst(attr):
    worst, points, skipped = 0.0, 0, 0
    for spec in _random_family():
        for res in scan(spec, build_coupling_space(spec), interior_grid(spec, 200)):
            if isinstance(res, Exception):
                skipped += 1
                continue
            points += 1
            worst = max(worst, getattr(res, attr))
    return worst, points, skipped


def test_criterion_2_unitarity(report):
    worst, points, skipped = _family_worst("unitarity_residual")
    assert report(
        "2 S-matrix unitarity", worst < 1e-8 and points > 0,
        f"worst ||SS^+ - 1||={worst:.2e} (tol 1e-8) over {points} energies, {skipped} excluded",
    )


def test_criterion_3_optical_theorem(report):
    worst, points, skipped = _family_worst("optical_residual")
    assert report(
        "3 optical theorem", worst < 1e-8 and points > 0,
        f"worst residual={worst:.2e} (tol 1e-8) over {points} energies, {skipped} excluded",
    )


def test_criterion_4_conservation_without_time_reversal(report):
    spec = flux_junction()
    gap = 0.0
    for res in scan(spec, build_coupling_space(spec), interior_grid(spec, 200)):
        t2 = np.abs(res.t_matrix) ** 2
        gap = max(gap, float(np.max(np.abs(t2 - t2.T))))
    rep = currents(spec)
    total = abs(rep.charge_currents.sum())
    bound = 3 * rep.charge_errors.max()
    assert report(
        "4 conservation, broken TR", gap > 1e-3 and total <= bound,
        f"max ||T_kj|^2-|T_jk|^2|={gap:.3e} (need >1e-3), |sum j|={total:.2e} <= {bound:.2e}",
    )


def test_criterion_5_perfect_chain(report):
    spec = perfect_chain()
    grid = interior_grid(spec, 200)
    results = scan(spec, build_coupling_space(spec), grid)
    dev = max(abs(transmission_probability(r, 0, 1) - 1.0) for r in results)
    cross = max(abs(chain_transmission(e, 1.0, 0.0, [], [-1.0]) - 1.0) for e in grid)
    assert report(
        "5 perfect chain", dev < 1e-8 and cross < 1e-8,
        f"max |T-1|={dev:.2e}, transfer-matrix max |T-1|={cross:.2e} (tol 1e-8)",
    )


def test_criterion_6_equilibrium(report):
    spec = resonant_level(mus=(0.1, 0.1))
    rep = currents(spec)
    worst = float(max(np.abs(rep.charge_currents).max(), np.abs(rep.energy_currents).max()))
    ness = ness_currents(spec, L=400)
    consistent = all(abs(p.value) <= p.fluctuation + 1e-12 for p in ness.charge + ness.energy)
    largest = max(abs(p.value) for p in ness.charge + ness.energy)
    assert report(
        "6 equilibrium null", worst < 1e-9 and consistent,
        f"max |current|={worst:.2e} (tol 1e-9), max |plateau|={largest:.2e} within fluctuation: {consistent}",
    )


def test_criterion_7_energy_current(report):
    sym = currents(resonant_level(level=0.0))
    phi_ok = abs(sym.energy_currents[0]) <= max(sym.energy_errors[0], 1e-12)
    j_ok = abs(sym.charge_currents[0]) > 1e-3
    spec = resonant_level()
    lb = currents(spec).energy_currents[0]
    plateau = ness_currents(spec, L=400).energy[0].value
    dev = abs(plateau - lb) / abs(lb)
    assert report(
        "7 energy current", phi_ok and j_ok and dev < 0.02,
        f"symmetric Phi_1={sym.energy_currents[0]:.2e} (err {sym.energy_errors[0]:.1e}), "
        f"j_1={sym.charge_currents[0]:.4g}; asymmetric Phi_LB={lb:.8g} "
        f"Phi_NESS={plateau:.8g} rel dev={dev:.2e} (tol 2e-2)",
    )


def _truncated_column(z, L, n):
    ab = np.zeros((3, L), complex)
    ab[0, 1:] = 1.0
    ab[1, :] = z
    ab[2, :-1] = 1.0
    rhs = np.zeros(L, complex)
    rhs[n - 1] = 1.0
    return solve_banded((1, 1), ab, rhs)


def test_criterion_8_spectral_foundations(report):
    lead = LeadSpec(1.0, 0.0)
    eta, L = 1e-3, 2000
    worst = 0.0
    for e in np.linspace(-2.0, 2.0, 22)[1:-1]:
        z = e + 1j * eta
        for n in range(1, 5):
            col = _truncated_column(z, L, n)
            for m in range(1, 5):
                worst = max(worst, abs(col[m - 1] - lead_green(lead, z, n, m)))
    rng = np.random.default_rng(7)
    sp = 0.0
    sites = np.arange(1, 5)
    for e in np.linspace(-2.0, 2.0, 22)[1:-1]:
        f = rng.normal(size=4) + 1j * rng.normal(size=4)
        form = np.vdot(f, lead_green(lead, e, sites[:, None], sites[None, :]) @ f)
        proj = np.dot(eigenfunction(lead, band_point(lead, e), sites), f)
        sp = max(sp, abs(form.imag + np.pi * abs(proj) ** 2))
    assert report(
        "8 spectral foundations", worst < 1e-6 and sp < 1e-8,
        f"closed form vs truncated resolvent (L={L}, eta={eta}) max err={worst:.3e} (tol 1e-6); "
        f"Sokhotski-Plemelj residual={sp:.2e} (tol 1e-8)",
    )
