"""Closed-form spectral data of an uncoupled semi-infinite tight-binding lead.

Conventions: ``E = onsite - 2 t cos k`` with ``k`` in (0, pi).  Generalized
eigenfunctions are normalized on the energy scale,
``int dE psi_E(n) psi_E(m) = delta_nm``, which gives

    psi_E(n) = sin(k n) / sqrt(pi t sin k).

``lead_green`` returns the retarded resolvent ``(z - H_lead)^{-1}``, so that
``Im G(E + i0) = -pi |psi_E><psi_E|`` on the band.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from landauer.errors import AtBandEdge, OutOfBand, OutOfBandRealAxis
from landauer.model import DotSpec, LeadSpec

EDGE_MARGIN = 1e-6  # fraction of the bandwidth


@dataclass(frozen=True)
class BandPoint:
    energy: float
    wavenumber: float
    velocity: float


def edge_distance(lead: LeadSpec, energy: float) -> float:
    """Distance from ``energy`` to the nearest band edge of ``lead``."""
    lo, hi = lead.band
    return min(abs(energy - lo), abs(energy - hi))


def edge_tolerance(lead: LeadSpec, edge_margin: float = EDGE_MARGIN) -> float:
    return edge_margin * lead.bandwidth


def is_open(lead: LeadSpec, energy: float, edge_margin: float = EDGE_MARGIN) -> bool:
    lo, hi = lead.band
    delta = edge_tolerance(lead, edge_margin)
    return lo + delta < energy < hi - delta


def band_point(lead: LeadSpec, energy: float, edge_margin: float = EDGE_MARGIN) -> BandPoint:
    lo, hi = lead.band
    if not lo <= energy <= hi:
        raise OutOfBand(f"E={energy!r} outside band [{lo}, {hi}]")
    if edge_distance(lead, energy) <= edge_tolerance(lead, edge_margin):
        raise AtBandEdge(f"E={energy!r} within edge margin of band [{lo}, {hi}]")
    x = (lead.onsite - energy) / (2.0 * lead.hopping)  # cos k
    k = float(np.arccos(x))
    sin_k = float(np.sqrt((1.0 - x) * (1.0 + x)))
    return BandPoint(float(energy), k, 2.0 * lead.hopping * sin_k)


def point_energy(lead: LeadSpec, wavenumber: float) -> float:
    return lead.onsite - 2.0 * lead.hopping * np.cos(wavenumber)


def eigenfunction(lead: LeadSpec, point: BandPoint, site):
    """Energy-normalized standing wave at ``site`` (int or integer array, >= 1)."""
    k = point.wavenumber
    sin_k = point.velocity / (2.0 * lead.hopping)
    return np.sin(k * np.asarray(site)) / np.sqrt(np.pi * lead.hopping * sin_k)


def decay_factor(lead: LeadSpec, z: complex) -> complex:
    """Root of ``chi + 1/chi = (onsite - z) / t`` with ``|chi| < 1``.

    For ``Im z > 0`` this is the branch continued from the upper half plane;
    on the real axis off-band it is the decaying real root.
    """
    a = (lead.onsite - z) / (2.0 * lead.hopping)
    s = np.sqrt(a * a - 1.0 + 0j)
    big = a + s if abs(a + s) >= abs(a - s) else a - s
    return 1.0 / big


def lead_green(
    lead: LeadSpec,
    z: complex,
    n,
    m,
    edge_margin: float = EDGE_MARGIN,
    allow_offband: bool = False,
):
    """Matrix element ``<n|(z - H_lead)^{-1}|m>`` of the semi-infinite chain.

    ``z`` real means the boundary value ``E + i0``.  ``n`` and ``m`` broadcast.
    """
    z = complex(z)
    if z.imag < 0:
        raise ValueError("lead_green is defined for Im z >= 0 only")
    n = np.asarray(n)
    m = np.asarray(m)
    lo_site = np.minimum(n, m)
    hi_site = np.maximum(n, m)
    t = lead.hopping
    if z.imag == 0:
        energy = z.real
        lo, hi = lead.band
        if edge_distance(lead, energy) <= edge_tolerance(lead, edge_margin):
            raise AtBandEdge(f"E={energy!r} within edge margin of band [{lo}, {hi}]")
        if lo < energy < hi:
            p = band_point(lead, energy, edge_margin)
            sin_k = p.velocity / (2.0 * t)
            k = p.wavenumber
            return -np.sin(k * lo_site) * np.exp(1j * k * hi_site) / (t * sin_k)
        if not allow_offband:
            raise OutOfBandRealAxis(f"E={energy!r} outside band [{lo}, {hi}]")
    chi = decay_factor(lead, z)
    return (chi ** (hi_site - lo_site) - chi ** (hi_site + lo_site)) / (t * (chi - 1.0 / chi))


def dot_resolvent_residual(dot: DotSpec, energy: float, x, y) -> np.ndarray:
    """``(H_S - E) x + y``: the dot rows of the Lippmann-Schwinger system."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    y = np.asarray(y, dtype=complex).reshape(-1)
    if dot.dim == 0:
        return np.zeros(0, complex)
    return dot.matrix @ x - energy * x + y
