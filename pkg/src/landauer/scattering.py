"""Per-energy T and S matrices from the Lippmann-Schwinger equation.

V has finite range, so the scattering state is only needed on the coupling
space P = dot (+) {coupling sites of each lead}.  On P the stationary
equation becomes a finite linear system for u = (x, c)::

    (H_S - E) x + (V u)_dot = 0            dot rows
    c - G(E + i0) (V u)_leads = c0          lead rows

with ``G`` the retarded resolvent of the uncoupled leads and ``c0`` the
incoming standing wave.  The T matrix is ``T_jk = <psi0_j, V psi+_k>``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from landauer.errors import AtBandEdge, ExceptionalEnergy, LeadClosed, OutOfBand
from landauer.model import DOT, SystemSpec
from landauer.spectral import (
    EDGE_MARGIN,
    band_point,
    edge_distance,
    edge_tolerance,
    eigenfunction,
    is_open,
    lead_green,
)

COND_THRESHOLD = 1e12


@dataclass(frozen=True, eq=False)
class CouplingSpace:
    """Finite subspace carrying the range of V.

    Basis order: dot components first, then the sorted coupling sites of
    lead 0, lead 1, ... .
    """

    dot_dim: int
    sites: tuple[tuple[int, ...], ...]
    lead_vectors: tuple[tuple[int, dict], ...]
    v_matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.v_matrix.shape[0]

    def offset(self, lead: int) -> int:
        return self.dot_dim + sum(len(s) for s in self.sites[:lead])

    def index(self, key: tuple[int, int]) -> int:
        block, i = key
        if block == DOT:
            return i
        return self.offset(block) + self.sites[block].index(i)

    def lead_slice(self, lead: int) -> slice:
        start = self.offset(lead)
        return slice(start, start + len(self.sites[lead]))


def build_coupling_space(spec: SystemSpec) -> CouplingSpace:
    n = spec.n_leads
    sites: list[set[int]] = [set() for _ in range(n)]
    vectors: list[tuple[int, dict]] = []
    for term in spec.couplings:
        sites[term.right_lead].update(term.right_vector)
        vectors.append((term.right_lead, dict(term.right_vector)))
        if term.kind == "lead_lead":
            sites[term.left_lead].update(term.left_vector)
            vectors.append((term.left_lead, dict(term.left_vector)))
    unique = []
    for v in vectors:
        if v not in unique:
            unique.append(v)
    space = CouplingSpace(
        spec.dot.dim,
        tuple(tuple(sorted(s)) for s in sites),
        tuple(unique),
        np.zeros((0, 0), complex),
    )
    v = np.zeros((space.dot_dim + sum(len(s) for s in sites),) * 2, complex)
    for term in spec.couplings:
        for lkey, lval in term.left_entries():
            a = space.index(lkey)
            for rkey, rval in term.right_entries():
                b = space.index(rkey)
                w = term.amplitude * lval * np.conj(rval)
                v[a, b] += w
                v[b, a] += np.conj(w)
    v.setflags(write=False)
    object.__setattr__(space, "v_matrix", v)
    return space


@dataclass(frozen=True, eq=False)
class ScatteringData:
    energy: float
    t_matrix: np.ndarray
    s_matrix: np.ndarray
    open_leads: np.ndarray
    unitarity_residual: float
    optical_residual: float
    condition_estimate: float


def _open_block(m: np.ndarray, open_leads: np.ndarray) -> np.ndarray:
    return m[np.ix_(open_leads, open_leads)]


def unitarity_residual(data: ScatteringData) -> float:
    """``||S S^+ - 1||_2`` over the open-lead block."""
    s = _open_block(data.s_matrix, data.open_leads)
    return float(np.linalg.norm(s @ s.conj().T - np.eye(len(s)), 2)) if s.size else 0.0


def optical_residual(data: ScatteringData) -> float:
    """``||T - T^+ + 2 pi i T T^+||_2`` over the open-lead block."""
    t = _open_block(data.t_matrix, data.open_leads)
    if not t.size:
        return 0.0
    return float(np.linalg.norm(t - t.conj().T + 2j * np.pi * t @ t.conj().T, 2))


def normality_residual(data: ScatteringData) -> float:
    t = _open_block(data.t_matrix, data.open_leads)
    if not t.size:
        return 0.0
    return float(np.linalg.norm(t @ t.conj().T - t.conj().T @ t, 2))


def transmission_probability(data: ScatteringData, j: int, k: int) -> float:
    """``4 pi^2 |T_jk|^2``, equal to ``|S_jk|^2`` for ``j != k``."""
    for lead in (j, k):
        if not data.open_leads[lead]:
            raise LeadClosed(f"lead {lead + 1} has no propagating states at E={data.energy!r}")
    return float(4.0 * np.pi**2 * abs(data.t_matrix[j, k]) ** 2)


def solve_scattering(
    spec: SystemSpec,
    space: CouplingSpace,
    energy: float,
    edge_margin: float = EDGE_MARGIN,
    cond_threshold: float = COND_THRESHOLD,
) -> ScatteringData:
    n = spec.n_leads
    energy = float(energy)
    for j, lead in enumerate(spec.leads):
        if edge_distance(lead, energy) <= edge_tolerance(lead, edge_margin):
            raise AtBandEdge(f"E={energy!r} within edge margin of lead {j + 1}")
    open_leads = np.array([is_open(lead, energy, edge_margin) for lead in spec.leads])
    if not open_leads.any():
        raise OutOfBand(f"no lead is open at E={energy!r}")
    open_idx = np.flatnonzero(open_leads)

    m = space.dot_dim
    dim = space.dim
    t_open = np.zeros((len(open_idx), len(open_idx)), complex)
    cond = 1.0
    if dim:
        v = space.v_matrix
        # A = D + K V with D = diag(H_S - E, 1), K = diag(1, -G)
        d = np.eye(dim, dtype=complex)
        d[:m, :m] = spec.dot.matrix - energy * np.eye(m)
        k_mat = np.eye(dim, dtype=complex)
        incoming = np.zeros((dim, len(open_idx)))
        for j, lead in enumerate(spec.leads):
            sl = space.lead_slice(j)
            sites = np.array(space.sites[j])
            if not len(sites):
                continue
            k_mat[sl, sl] = -lead_green(
                lead, energy, sites[:, None], sites[None, :], edge_margin, allow_offband=True
            )
            if open_leads[j]:
                col = int(np.searchsorted(open_idx, j))
                incoming[sl, col] = eigenfunction(lead, band_point(lead, energy, edge_margin), sites)
        a = d + k_mat @ v
        cond = float(np.linalg.cond(a))
        if not np.isfinite(cond) or cond > cond_threshold:
            raise ExceptionalEnergy(energy, cond)
        u = np.linalg.solve(a, incoming)
        t_open = incoming.T @ (v @ u)

    t = np.zeros((n, n), complex)
    t[np.ix_(open_idx, open_idx)] = t_open
    s = np.eye(n, dtype=complex)
    s[np.ix_(open_idx, open_idx)] -= 2j * np.pi * t_open
    t.setflags(write=False)
    s.setflags(write=False)
    data = ScatteringData(energy, t, s, open_leads, 0.0, 0.0, cond)
    object.__setattr__(data, "unitarity_residual", unitarity_residual(data))
    object.__setattr__(data, "optical_residual", optical_residual(data))
    return data


def scan(
    spec: SystemSpec,
    space: CouplingSpace,
    energies: Sequence[float],
    workers: int | None = None,
    **kwargs,
) -> list[ScatteringData | Exception]:
    """Solve on a grid; failures are returned in place, results keep grid order."""

    def one(e):
        try:
            return solve_scattering(spec, space, e, **kwargs)
        except (AtBandEdge, OutOfBand, ExceptionalEnergy) as exc:
            return exc

    if workers is None or workers <= 1:
        return [one(e) for e in energies]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(one, energies))
