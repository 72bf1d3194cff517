"""Reference systems used by the test suite, the scripts and the CLI configs."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from landauer.model import CouplingTerm, DotSpec, LeadSpec, SystemSpec


def resonant_level(
    level: float = 0.2,
    coupling: float = 0.4,
    hopping: float = 1.0,
    beta: float = 50.0,
    mus: Sequence[float] = (0.3, -0.3),
    charge: float = 1.0,
) -> SystemSpec:
    """Single dot level coupled with equal amplitude to the surface site of each lead."""
    leads = tuple(LeadSpec(hopping, 0.0, beta, mu) for mu in mus)
    terms = tuple(CouplingTerm.dot_lead(j, [1.0], {1: 1.0}, coupling) for j in range(len(mus)))
    return SystemSpec(leads, DotSpec([[level]]), terms, charge)


def perfect_chain(hopping: float = 1.0, beta: float = 50.0, mus=(0.2, -0.2)) -> SystemSpec:
    """Two identical leads joined surface to surface with a bond equal to the lead hopping."""
    leads = tuple(LeadSpec(hopping, 0.0, beta, mu) for mu in mus)
    bond = CouplingTerm.lead_lead(0, 1, {1: 1.0}, {1: 1.0}, hopping)
    return SystemSpec(leads, DotSpec(), (bond,))


def flux_junction(phase: float = np.pi / 2, level: float = 0.0, coupling: float = 0.6,
                  contact: float = 0.6, mus=(0.4, -0.2, 0.0), beta: float = 20.0) -> SystemSpec:
    """Three-terminal dot with a direct 1-2 contact carrying a phase.

    The loop dot -> lead 1 -> lead 2 -> dot encloses a flux, which breaks
    time-reversal symmetry so that |T_12| != |T_21| in general.
    """
    leads = tuple(LeadSpec(1.0, 0.0, beta, mu) for mu in mus)
    terms = [CouplingTerm.dot_lead(j, [1.0], {1: 1.0}, coupling) for j in range(3)]
    terms.append(CouplingTerm.lead_lead(0, 1, {1: 1.0}, {1: 1.0}, contact * np.exp(1j * phase)))
    return SystemSpec(leads, DotSpec([[level]]), tuple(terms))


def random_system(
    rng: np.random.Generator,
    n_leads: int | None = None,
    dot_dim: int | None = None,
    max_support: int = 3,
    real: bool = False,
) -> SystemSpec:
    """Random junction with couplings supported on at most ``max_support`` sites.

    With ``real=True`` every input is real, so the junction is time-reversal symmetric.
    """
    c = 0.0 if real else 1.0
    n = int(rng.integers(2, 4)) if n_leads is None else n_leads
    m = int(rng.integers(0, 4)) if dot_dim is None else dot_dim
    leads = tuple(
        LeadSpec(
            hopping=float(rng.uniform(0.5, 1.5)),
            onsite=float(rng.uniform(-1.0, 1.0)),
            beta=float(rng.uniform(5.0, 100.0)),
            mu=float(rng.uniform(-1.0, 1.0)),
        )
        for _ in range(n)
    )
    a = rng.normal(size=(m, m)) + c * 1j * rng.normal(size=(m, m))
    dot = DotSpec(0.5 * (a + a.conj().T))

    def lead_vector():
        size = int(rng.integers(1, max_support + 1))
        sites = rng.choice(np.arange(1, 5), size=size, replace=False)
        return {int(s): complex(rng.normal(), c * rng.normal()) for s in sites}

    def amplitude():
        r = rng.uniform(0.2, 1.0)
        return r * np.exp(2j * np.pi * rng.uniform()) if not real else r * rng.choice([-1.0, 1.0])

    terms = []
    if m:
        for j in range(n):
            dvec = rng.normal(size=m) + c * 1j * rng.normal(size=m)
            terms.append(CouplingTerm.dot_lead(j, dvec / np.linalg.norm(dvec), lead_vector(), amplitude()))
    for j in range(n):
        for k in range(j + 1, n):
            if not m or rng.uniform() < 0.5:
                terms.append(CouplingTerm.lead_lead(j, k, lead_vector(), lead_vector(), amplitude()))
    return SystemSpec(leads, dot, tuple(terms))


def interior_grid(spec: SystemSpec, count: int, edge_margin: float = 1e-6) -> np.ndarray:
    """``count`` energies spread over the union of bands, away from every band edge."""
    lo = min(lead.band[0] for lead in spec.leads)
    hi = max(lead.band[1] for lead in spec.leads)
    grid = np.linspace(lo, hi, count + 2)[1:-1]
    delta = 10 * edge_margin * max(lead.bandwidth for lead in spec.leads)
    edges = np.array([e for lead in spec.leads for e in lead.band])
    return grid[np.min(np.abs(grid[:, None] - edges[None, :]), axis=1) > delta]
