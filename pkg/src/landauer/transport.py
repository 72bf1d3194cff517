"""Steady-state charge and energy currents from transmission coefficients.

Sign and prefactor conventions (hbar = 1, electron charge -e)::

    j_k   = -2 e pi  int dE sum_j (f_k - f_j) |T_kj(E)|^2
    Phi_k = +2 pi    int dE sum_j (f_k - f_j) E |T_kj(E)|^2

``j_k`` is the charge current out of reservoir k (minus the rate of change
of its charge); ``Phi_k`` the energy current out of it.  For N > 2 the
energy current is the natural extension of the two-terminal expression.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from landauer.errors import ExceptionalEnergy, QuadratureFailure
from landauer.model import SystemSpec, spectral_intersection
from landauer.scattering import COND_THRESHOLD, build_coupling_space, solve_scattering
from landauer.spectral import EDGE_MARGIN, edge_tolerance

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes, ascending
_W_K = np.concatenate([_WGK[:-1], _WGK[::-1]])
_W_G = np.zeros(15)
_W_G[1:7:2] = _WG[:3]
_W_G[7] = _WG[3]
_W_G[9:15:2] = _WG[2::-1]


def fermi_dirac(energy, beta: float, mu: float):
    """Occupation ``1 / (exp(beta (E - mu)) + 1)``; ``beta = inf`` gives a step, 1/2 at mu."""
    e = np.asarray(energy, dtype=float)
    if math.isinf(beta):
        out = np.where(e < mu, 1.0, np.where(e > mu, 0.0, 0.5))
    else:
        out = expit(-beta * (e - mu))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-9
    rel_tol: float = 0.0
    budget: int = 2000
    edge_margin: float = EDGE_MARGIN
    cond_threshold: float = COND_THRESHOLD


@dataclass
class QuadResult:
    value: np.ndarray | float
    error: np.ndarray | float
    intervals: int
    evaluations: int
    excluded: int


def integrate_band(
    f: Callable[[float], float | np.ndarray],
    domain: Sequence[tuple[float, float]],
    quad: QuadratureConfig | None = None,
    breakpoints: Sequence[float] = (),
    full_output: bool = False,
):
    """Adaptive Gauss-Kronrod integral of ``f`` over a union of intervals.

    Each interval [a, b] is mapped by ``E = c - h cos(theta)``, theta in
    [0, pi], which removes inverse-square-root edge singularities and the
    square-root onsets of band-edge integrands.  Nodes where ``f`` raises
    :class:`ExceptionalEnergy` are removed by bisecting the panel that
    contains them.  ``f`` may return a vector; errors are then per entry.

    Returns ``(value, error)`` or a :class:`QuadResult`.
    """
    quad = quad or QuadratureConfig()
    pieces = _split(domain, breakpoints)

    counter = 0
    heap: list = []
    frozen_value = None
    frozen_error = None
    evaluations = 0
    excluded = 0
    shape = None

    def panel(c, h, ta, tb):
        nonlocal evaluations
        mid = 0.5 * (ta + tb)
        half = 0.5 * (tb - ta)
        theta = mid + half * _NODES
        energies = c - h * np.cos(theta)
        jac = h * np.sin(theta) * half
        vals = []
        for e in energies:
            evaluations += 1
            vals.append(np.asarray(f(float(e)), dtype=float))
        vals = np.array(vals)
        wj = jac.reshape((-1,) + (1,) * (vals.ndim - 1))
        k = np.sum(_W_K.reshape(wj.shape) * wj * vals, axis=0)
        g = np.sum(_W_G.reshape(wj.shape) * wj * vals, axis=0)
        return k, np.abs(k - g)

    pending = [(c, h, 0.0, math.pi) for c, h in pieces]
    while pending:
        c, h, ta, tb = pending.pop()
        try:
            val, err = panel(c, h, ta, tb)
        except ExceptionalEnergy:
            excluded += 1
            if tb - ta > 1e-13:
                mid = 0.5 * (ta + tb)
                pending.extend([(c, h, mid, tb), (c, h, ta, mid)])
            continue
        shape = val.shape
        heapq.heappush(heap, (-float(np.max(err)), counter, c, h, ta, tb, val, err))
        counter += 1

    if not heap:
        zero = 0.0 if shape in (None, ()) else np.zeros(shape)
        res = QuadResult(zero, zero, 0, evaluations, excluded)
        return res if full_output else (res.value, res.error)

    def totals():
        vals = [item[6] for item in heap]
        errs = [item[7] for item in heap]
        v = np.sum(vals, axis=0)
        e = np.sum(errs, axis=0)
        if frozen_value is not None:
            v = v + frozen_value
            e = e + frozen_error
        return v, e

    while True:
        value, error = totals()
        target = np.maximum(quad.abs_tol, quad.rel_tol * np.abs(value))
        if np.all(error <= target) or not heap:
            break
        if len(heap) >= quad.budget:
            raise QuadratureFailure(
                f"error {float(np.max(error)):.3e} above target {float(np.min(target)):.3e} "
                f"after {len(heap)} intervals"
            )
        _, _, c, h, ta, tb, val, err = heapq.heappop(heap)
        if tb - ta < 1e-13:
            frozen_value = val if frozen_value is None else frozen_value + val
            frozen_error = err if frozen_error is None else frozen_error + err
            continue
        mid = 0.5 * (ta + tb)
        stack = [(ta, mid), (mid, tb)]
        while stack:
            a, b = stack.pop()
            try:
                v, e = panel(c, h, a, b)
            except ExceptionalEnergy:
                excluded += 1
                if b - a > 1e-13:
                    m = 0.5 * (a + b)
                    stack.extend([(a, m), (m, b)])
                continue
            heapq.heappush(heap, (-float(np.max(e)), counter, c, h, a, b, v, e))
            counter += 1

    if shape == ():
        value, error = float(value), float(error)
    res = QuadResult(value, error, len(heap), evaluations, excluded)
    return res if full_output else (res.value, res.error)


def _split(domain, breakpoints) -> list[tuple[float, float]]:
    """Cut intervals at breakpoints; return (center, half-width) per piece."""
    out = []
    for a, b in domain:
        if not b > a:
            continue
        cuts = sorted({a, b, *(p for p in breakpoints if a < p < b)})
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi > lo:
                out.append((0.5 * (lo + hi), 0.5 * (hi - lo)))
    return out


def _union(intervals) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if hi <= lo:
            continue
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(a, b) for a, b in merged]


def transport_domain(
    spec: SystemSpec, leads: Sequence[int] | None = None, edge_margin: float = EDGE_MARGIN
) -> tuple[list[tuple[float, float]], list[float]]:
    """Integration domain and interior breakpoints for the currents of ``leads``.

    The domain is the union over k in ``leads`` and j != k of the band
    intersections, cut at every band edge and chemical potential, with an
    edge-exclusion margin removed around band edges.  When every reservoir
    is at zero temperature it is restricted to [min mu, max mu].
    """
    n = spec.n_leads
    leads = range(n) if leads is None else leads
    raw = []
    for k in leads:
        for j in range(n):
            if j != k:
                raw.extend(spectral_intersection(spec, (k, j)))
    domain = _union(raw)
    if all(math.isinf(lead.beta) for lead in spec.leads):
        lo = min(lead.mu for lead in spec.leads)
        hi = max(lead.mu for lead in spec.leads)
        domain = [(max(a, lo), min(b, hi)) for a, b in domain if min(b, hi) > max(a, lo)]

    edges = sorted({e for lead in spec.leads for e in lead.band})
    delta = 2.0 * max(edge_tolerance(lead, edge_margin) for lead in spec.leads)
    pieces = []
    for a, b in domain:
        cuts = sorted({a, b, *(e for e in edges if a < e < b)})
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if any(abs(lo - e) < delta for e in edges):
                lo += delta
            if any(abs(hi - e) < delta for e in edges):
                hi -= delta
            if hi > lo:
                pieces.append((lo, hi))
    mus = sorted({lead.mu for lead in spec.leads})
    return pieces, mus


@dataclass
class CurrentReport:
    charge_currents: np.ndarray
    energy_currents: np.ndarray
    charge_errors: np.ndarray
    energy_errors: np.ndarray
    conservation_defect: float
    energy_conservation_defect: float
    grid_metadata: dict = field(default_factory=dict)


def _integrand(spec: SystemSpec, quad: QuadratureConfig, leads: Sequence[int]):
    space = build_coupling_space(spec)
    e_charge = spec.charge
    leads = list(leads)

    def f(energy: float) -> np.ndarray:
        data = solve_scattering(spec, space, energy, quad.edge_margin, quad.cond_threshold)
        occ = np.array([fermi_dirac(energy, lead.beta, lead.mu) for lead in spec.leads])
        weight = np.abs(data.t_matrix[leads, :]) ** 2
        flux = np.sum((occ[leads, None] - occ[None, :]) * weight, axis=1)
        return np.concatenate([-2.0 * e_charge * np.pi * flux, 2.0 * np.pi * energy * flux])

    return f


def currents(spec: SystemSpec, quad: QuadratureConfig | None = None) -> CurrentReport:
    """Charge and energy currents out of every reservoir, sharing one adaptive grid."""
    quad = quad or QuadratureConfig()
    n = spec.n_leads
    domain, breaks = transport_domain(spec, None, quad.edge_margin)
    res = integrate_band(_integrand(spec, quad, range(n)), domain, quad, breaks, full_output=True)
    value = np.broadcast_to(np.asarray(res.value, float), (2 * n,)).copy()
    error = np.broadcast_to(np.asarray(res.error, float), (2 * n,)).copy()
    return CurrentReport(
        charge_currents=value[:n],
        energy_currents=value[n:],
        charge_errors=error[:n],
        energy_errors=error[n:],
        conservation_defect=float(abs(value[:n].sum())),
        energy_conservation_defect=float(abs(value[n:].sum())),
        grid_metadata={
            "domain": domain,
            "breakpoints": breaks,
            "intervals": res.intervals,
            "evaluations": res.evaluations,
            "excluded_panels": res.excluded,
        },
    )


def _single(spec, k, quad, which):
    quad = quad or QuadratureConfig()
    domain, breaks = transport_domain(spec, [k], quad.edge_margin)
    value, error = integrate_band(_integrand(spec, quad, [k]), domain, quad, breaks)
    value = np.broadcast_to(np.asarray(value, float), (2,))
    error = np.broadcast_to(np.asarray(error, float), (2,))
    return float(value[which]), float(error[which])


def charge_current(spec: SystemSpec, k: int, quad: QuadratureConfig | None = None):
    """``(j_k, error_estimate)`` for reservoir ``k``."""
    return _single(spec, k, quad, 0)


def energy_current(spec: SystemSpec, k: int, quad: QuadratureConfig | None = None):
    """``(Phi_k, error_estimate)`` for reservoir ``k``."""
    return _single(spec, k, quad, 1)
