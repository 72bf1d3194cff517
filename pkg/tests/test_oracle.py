import math
import warnings

import numpy as np
import pytest
from scipy.linalg import eigvalsh_tridiagonal

from landauer.benchmarks import flux_junction, resonant_level
from landauer.errors import RecurrenceHorizonExceeded, TruncationTooShort, WindowOutsideTrace
from landauer.model import DOT, CouplingTerm, DotSpec, LeadSpec, SystemSpec
from landauer.oracle import (
    EvolutionTrace,
    build_truncated,
    density_at,
    evolve_currents,
    extract_plateau,
    initial_density,
    ness_currents,
)
from landauer.transport import currents, fermi_dirac


def decoupled(mus=(0.3, -0.3), beta=50.0):
    leads = tuple(LeadSpec(1.0, 0.0, beta, mu) for mu in mus)
    return SystemSpec(leads, DotSpec([[0.2]]), ())


def synthetic(values, times=None):
    values = np.asarray(values, float)
    times = np.arange(len(values), dtype=float) if times is None else times
    col = values[:, None]
    z = np.zeros_like(col)
    return EvolutionTrace(times, col, col, z, z, z[:, 0], z[:, 0])


class TestBuild:
    def test_dimension(self):
        assert build_truncated(resonant_level(), 3).total_dim == 7

    def test_too_short(self):
        terms = (CouplingTerm.dot_lead(0, [1.0], {5: 1.0}),)
        spec = SystemSpec((LeadSpec(), LeadSpec()), DotSpec([[0.0]]), terms)
        with pytest.raises(TruncationTooShort):
            build_truncated(spec, 4)
        build_truncated(spec, 6)

    def test_decoupled_is_block_diagonal(self):
        sys = build_truncated(decoupled(), 5)
        h = sys.hamiltonian
        blocks = [sys.dot_slice, sys.lead_slice(0), sys.lead_slice(1)]
        for a in blocks:
            for b in blocks:
                if a != b:
                    assert not h[a, b].any()

    def test_hermitian_and_matches_coupling(self):
        spec = flux_junction()
        sys = build_truncated(spec, 6)
        assert np.array_equal(sys.hamiltonian, sys.hamiltonian.conj().T)
        i = sys.site_index((0, 1))
        j = sys.site_index((1, 1))
        assert sys.v[i, j] == pytest.approx(0.6 * np.exp(1j * np.pi / 2))
        assert sys.v[sys.site_index((DOT, 0)), i] == pytest.approx(0.6)

    def test_projections(self):
        sys = build_truncated(flux_junction(), 7)
        projs = [sys.projector(DOT)] + [sys.projector(j) for j in range(3)]
        assert np.array_equal(sum(projs), np.eye(sys.total_dim))
        for a in range(4):
            for b in range(4):
                if a != b:
                    assert not (projs[a] @ projs[b]).any()


class TestInitialDensity:
    def test_empty_and_full_bands(self):
        spec = decoupled(mus=(-5.0, 5.0), beta=math.inf)
        sys = build_truncated(spec, 20)
        rho = initial_density(sys, spec)
        assert not rho[sys.lead_slice(0), sys.lead_slice(0)].any()
        assert np.allclose(rho[sys.lead_slice(1), sys.lead_slice(1)], np.eye(20), atol=1e-12)
        assert not rho[sys.dot_slice, sys.dot_slice].any()

    def test_trace_matches_eigenvalue_sum(self):
        spec = decoupled(mus=(0.37, -0.8), beta=12.0)
        sys = build_truncated(spec, 60)
        rho = initial_density(sys, spec)
        for j, lead in enumerate(spec.leads):
            lam = eigvalsh_tridiagonal(np.full(60, lead.onsite), np.full(59, -lead.hopping))
            expected = np.sum(fermi_dirac(lam, lead.beta, lead.mu))
            sl = sys.lead_slice(j)
            assert np.trace(rho[sl, sl]).real == pytest.approx(expected, rel=1e-12)

    def test_spectrum_in_unit_interval(self):
        spec = resonant_level()
        rho = initial_density(build_truncated(spec, 40), spec)
        ev = np.linalg.eigvalsh(rho)
        assert ev.min() > -1e-12 and ev.max() < 1 + 1e-12


class TestEvolve:
    def test_no_coupling(self):
        spec = decoupled()
        sys = build_truncated(spec, 50)
        rho0 = initial_density(sys, spec)
        trace = evolve_currents(sys, rho0, np.arange(0, 20, 0.5))
        assert not trace.currents.any() and not trace.energy_currents.any()
        assert np.abs(density_at(sys, rho0, 13.7) - rho0).sum() < 1e-10

    def test_restricted_trace_matches_full(self):
        spec = flux_junction()
        sys = build_truncated(spec, 40)
        rho0 = initial_density(sys, spec)
        t = 7.3
        trace = evolve_currents(sys, rho0, [0.0, t])
        rho = density_at(sys, rho0, t)
        for k in range(3):
            pk = sys.projector(k)
            direct = 1j * spec.charge * np.trace(rho @ (sys.v @ pk - pk @ sys.v))
            hk = pk @ sys.h0 @ pk
            energy = -1j * np.trace(rho @ (sys.v @ hk - hk @ sys.v))
            assert trace.currents[1, k] == pytest.approx(direct.real, abs=1e-12)
            assert trace.energy_currents[1, k] == pytest.approx(energy.real, abs=1e-12)
            assert abs(direct.imag) < 1e-10
        # partitioned initial state: V couples blocks that rho0 keeps apart
        assert np.allclose(trace.currents[0], 0, atol=1e-14)

    def test_charge_balance(self):
        spec = flux_junction()
        sys = build_truncated(spec, 80)
        rho0 = initial_density(sys, spec)
        trace = evolve_currents(sys, rho0, np.arange(0, 30, 0.5))
        total = trace.currents.sum(axis=1) + spec.charge * trace.dot_charge_rate
        bound = 1e-8 * np.abs(trace.currents).max(axis=1) + 1e-12
        assert np.all(np.abs(total) < bound)
        assert np.abs(trace.imag_currents).max() < 1e-10

    def test_dot_charge_rate_is_derivative(self):
        spec = resonant_level()
        sys = build_truncated(spec, 60)
        rho0 = initial_density(sys, spec)
        dt = 1e-3
        times = np.arange(2.0, 3.0, dt)
        trace = evolve_currents(sys, rho0, times)
        centered = (trace.dot_charge[2:] - trace.dot_charge[:-2]) / (2 * dt)
        assert np.allclose(centered, trace.dot_charge_rate[1:-1], atol=1e-6)

    def test_density_stays_physical(self):
        spec = flux_junction()
        sys = build_truncated(spec, 40)
        rho0 = initial_density(sys, spec)
        for t in (0.0, 3.1, 17.0):
            rho = density_at(sys, rho0, t)
            assert np.abs(rho - rho.conj().T).max() < 1e-10
            ev = np.linalg.eigvalsh(rho)
            assert ev.min() > -1e-10 and ev.max() < 1 + 1e-10

    def test_recurrence_warning(self):
        spec = resonant_level()
        sys = build_truncated(spec, 20)
        with pytest.warns(RecurrenceHorizonExceeded):
            evolve_currents(sys, initial_density(sys, spec), [0.0, 50.0])
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            evolve_currents(sys, initial_density(sys, spec), [0.0, 5.0])

    def test_csv(self):
        spec = resonant_level()
        sys = build_truncated(spec, 20)
        text = evolve_currents(sys, initial_density(sys, spec), [0.0, 1.0]).to_csv()
        lines = text.splitlines()
        assert lines[0].startswith("t [1/energy],j_1 [e*energy],j_2 [e*energy],Phi_1 [energy^2]")
        assert len(lines) == 3


class TestPlateau:
    def test_constant(self):
        (p,) = extract_plateau(synthetic(np.full(20, 0.7)), (5, 15))
        assert p.value == pytest.approx(0.7) and p.fluctuation == pytest.approx(0.0, abs=1e-15)
        assert not p.flagged

    def test_ramp_is_flagged(self):
        (p,) = extract_plateau(synthetic(np.linspace(1, 2, 20)), (0, 19))
        assert p.flagged

    def test_window_outside(self):
        with pytest.raises(WindowOutsideTrace):
            extract_plateau(synthetic(np.ones(10)), (5, 20))

    def test_equilibrium_plateau(self):
        res = ness_currents(resonant_level(mus=(0.1, 0.1)), L=200, window=(50, 90))
        for p in res.charge + res.energy:
            assert abs(p.value) <= max(p.fluctuation, 1e-12)

    def test_benchmark_plateau(self, benchmark_spec):
        res = ness_currents(benchmark_spec)
        ref = currents(benchmark_spec)
        for k in range(2):
            p = res.charge[k]
            assert p.fluctuation < 0.01 * abs(p.value)
            assert p.value == pytest.approx(ref.charge_currents[k], rel=1e-2)
            assert not p.flagged


@pytest.mark.slow
def test_convergence_in_length(benchmark_spec):
    ref = currents(benchmark_spec).charge_currents[0]
    plateaus = []
    for L in (200, 400, 800):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RecurrenceHorizonExceeded)
            plateaus.append(ness_currents(benchmark_spec, L=L).charge[0].value)
    assert abs(plateaus[2] - plateaus[1]) < abs(plateaus[1] - plateaus[0])
    assert plateaus[2] == pytest.approx(ref, rel=5e-3)
