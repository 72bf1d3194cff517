"""Time-domain NESS currents on a truncated lattice.

Every lead is cut to L sites, the reservoirs are filled with their own
Fermi-Dirac distributions while decoupled, the coupling is switched on at
t = 0 and the one-particle density evolves exactly::

    rho(t) = exp(-iHt) rho0 exp(iHt)
    j_k(t)   = i e Tr(rho(t) [V, P_k])
    Phi_k(t) = -i Tr(rho(t) [V, P_k H0 P_k])

Before the first reflection from the far end of a lead returns, the
currents settle on a plateau that approximates the steady state.

Also holds two independent transmission oracles: a transfer-matrix
recursion for chain junctions and wavepacket scattering on a finite lattice.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from landauer.errors import RecurrenceHorizonExceeded, TruncationTooShort, WindowOutsideTrace
from landauer.model import DOT, SystemSpec
from landauer.transport import fermi_dirac


@dataclass(frozen=True, eq=False)
class TruncatedSystem:
    hamiltonian: np.ndarray
    h0: np.ndarray
    v: np.ndarray
    dot_dim: int
    lead_lengths: tuple[int, ...]
    charge: float = 1.0
    hoppings: tuple[float, ...] = ()

    @property
    def total_dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def dot_slice(self) -> slice:
        return slice(0, self.dot_dim)

    def lead_slice(self, j: int) -> slice:
        start = self.dot_dim + sum(self.lead_lengths[:j])
        return slice(start, start + self.lead_lengths[j])

    def projector(self, block: int) -> np.ndarray:
        """Dense projection onto a block (``DOT`` or a lead index)."""
        p = np.zeros(self.total_dim)
        p[self.dot_slice if block == DOT else self.lead_slice(block)] = 1.0
        return np.diag(p)

    def site_index(self, key: tuple[int, int]) -> int:
        block, i = key
        return i if block == DOT else self.lead_slice(block).start + i - 1

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.hamiltonian)

    @property
    def recurrence_horizon(self) -> float:
        return min(self.lead_lengths) / (2.0 * max(self.hoppings))


def build_truncated(spec: SystemSpec, L: int | Sequence[int]) -> TruncatedSystem:
    n = spec.n_leads
    lengths = tuple([int(L)] * n if np.isscalar(L) else (int(x) for x in L))
    if len(lengths) != n:
        raise ValueError(f"expected {n} lead lengths, got {len(lengths)}")
    for j in range(n):
        need = spec.max_site(j) + 1
        if lengths[j] < need:
            raise TruncationTooShort(f"lead {j + 1}: L={lengths[j]} < {need} needed by couplings")
    m = spec.dot.dim
    dim = m + sum(lengths)
    h0 = np.zeros((dim, dim), complex)
    h0[:m, :m] = spec.dot.matrix
    start = m
    for lead, length in zip(spec.leads, lengths):
        idx = np.arange(start, start + length)
        h0[idx, idx] = lead.onsite
        h0[idx[:-1], idx[1:]] = -lead.hopping
        h0[idx[1:], idx[:-1]] = -lead.hopping
        start += length
    sys = TruncatedSystem(h0, h0, np.zeros_like(h0), m, lengths, spec.charge,
                          tuple(lead.hopping for lead in spec.leads))
    v = np.zeros_like(h0)
    for term in spec.couplings:
        for lkey, lval in term.left_entries():
            a = sys.site_index(lkey)
            for rkey, rval in term.right_entries():
                b = sys.site_index(rkey)
                w = term.amplitude * lval * np.conj(rval)
                v[a, b] += w
                v[b, a] += np.conj(w)
    for arr in (h0, v):
        arr.setflags(write=False)
    h = h0 + v
    h.setflags(write=False)
    return TruncatedSystem(h, h0, v, m, lengths, spec.charge, sys.hoppings)


def initial_density(sys: TruncatedSystem, spec: SystemSpec) -> np.ndarray:
    """Block-diagonal ``sum_j f_j(H_j)`` on the leads; empty dot."""
    rho = np.zeros((sys.total_dim, sys.total_dim), complex)
    for j, lead in enumerate(spec.leads):
        sl = sys.lead_slice(j)
        lam, w = np.linalg.eigh(sys.h0[sl, sl])
        occ = fermi_dirac(lam, lead.beta, lead.mu)
        rho[sl, sl] = (w * occ) @ w.conj().T
    return rho


def density_at(sys: TruncatedSystem, rho0: np.ndarray, t: float) -> np.ndarray:
    lam, w = sys.eig
    u = (w * np.exp(-1j * lam * t)) @ w.conj().T
    return u @ rho0 @ u.conj().T


@dataclass
class Plateau:
    value: float
    fluctuation: float
    window: tuple[float, float]
    flagged: bool


@dataclass
class EvolutionTrace:
    times: np.ndarray
    currents: np.ndarray            # (n_times, N) charge currents
    energy_currents: np.ndarray     # (n_times, N)
    imag_currents: np.ndarray       # imaginary parts, diagnostics only
    imag_energy_currents: np.ndarray
    dot_charge: np.ndarray          # Tr(rho Pi_S), particle number
    dot_charge_rate: np.ndarray     # d/dt Tr(rho Pi_S), from i Tr(rho [V, Pi_S])
    charge: float = 1.0
    plateau: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        n = self.currents.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["t [1/energy]"]
            + [f"j_{k + 1} [e*energy]" for k in range(n)]
            + [f"Phi_{k + 1} [energy^2]" for k in range(n)]
            + [f"im_j_{k + 1} [e*energy]" for k in range(n)]
            + [f"im_Phi_{k + 1} [energy^2]" for k in range(n)]
        )
        for i, t in enumerate(self.times):
            w.writerow(
                [repr(float(t))]
                + [repr(float(x)) for x in self.currents[i]]
                + [repr(float(x)) for x in self.energy_currents[i]]
                + [repr(float(x)) for x in self.imag_currents[i]]
                + [repr(float(x)) for x in self.imag_energy_currents[i]]
            )
        return buf.getvalue()


def _observables(sys: TruncatedSystem, n_leads: int):
    """Index set Q carrying every observable, and the observables restricted to Q."""
    v, h0 = sys.v, sys.h0
    support = set(np.flatnonzero(np.any(v != 0, axis=0)))
    q = set(support)
    for p in support:
        q.update(np.flatnonzero(h0[p] != 0))
    q.update(range(sys.dot_dim))
    q = np.array(sorted(q), dtype=int)
    vq = v[np.ix_(q, q)]
    obs = []
    for k in range(n_leads):
        pk = np.zeros(sys.total_dim)
        pk[sys.lead_slice(k)] = 1.0
        pq = pk[q]
        obs.append(1j * sys.charge * (vq * pq[None, :] - pq[:, None] * vq))
    for k in range(n_leads):
        sl = sys.lead_slice(k)
        hk = np.zeros_like(h0)
        hk[sl, sl] = h0[sl, sl]
        # [V, H_k] restricted to Q is exact: V's support and its H_k-neighbours lie in Q
        comm = (v @ hk - hk @ v)[np.ix_(q, q)]
        obs.append(-1j * comm)
    ps = np.zeros(len(q))
    ps[: sys.dot_dim] = 1.0  # dot indices are the first entries of q
    obs.append(np.diag(ps).astype(complex))
    obs.append(1j * (vq * ps[None, :] - ps[:, None] * vq))
    return q, obs


def evolve_currents(
    sys: TruncatedSystem, rho0: np.ndarray, times: Sequence[float]
) -> EvolutionTrace:
    times = np.asarray(times, dtype=float)
    if times.size and times.max() > sys.recurrence_horizon:
        warnings.warn(
            f"t={times.max():g} exceeds recurrence horizon {sys.recurrence_horizon:g}",
            RecurrenceHorizonExceeded,
            stacklevel=2,
        )
    n = len(sys.lead_lengths)
    lam, w = sys.eig
    q, obs = _observables(sys, n)
    rho_eig = w.conj().T @ rho0 @ w
    wq = w[q, :]
    values = np.empty((len(times), len(obs)), complex)
    for i, t in enumerate(times):
        a = wq * np.exp(-1j * lam * t)
        rho_q = a @ rho_eig @ a.conj().T
        # Tr(rho O) = sum_pq rho_pq O_qp
        values[i] = [np.sum(rho_q * o.T) for o in obs]
    return EvolutionTrace(
        times=times,
        currents=values[:, :n].real.copy(),
        energy_currents=values[:, n:2 * n].real.copy(),
        imag_currents=values[:, :n].imag.copy(),
        imag_energy_currents=values[:, n:2 * n].imag.copy(),
        dot_charge=values[:, 2 * n].real.copy(),
        dot_charge_rate=values[:, 2 * n + 1].real.copy(),
        charge=sys.charge,
    )


def extract_plateau(
    trace: EvolutionTrace,
    window: tuple[float, float],
    quantity: str = "charge",
    rel_tol: float = 0.05,
    noise_floor: float = 1e-8,
) -> list[Plateau]:
    """Window mean per lead; flagged when the spread exceeds ``rel_tol`` of the mean."""
    t0, t1 = window
    times = trace.times
    if not len(times) or t0 < times[0] - 1e-12 or t1 > times[-1] + 1e-12 or t1 < t0:
        raise WindowOutsideTrace(f"window {window} not inside recorded times")
    data = {"charge": trace.currents, "energy": trace.energy_currents}[quantity]
    mask = (times >= t0 - 1e-12) & (times <= t1 + 1e-12)
    if not mask.any():
        raise WindowOutsideTrace(f"no recorded times in window {window}")
    out = []
    for k in range(data.shape[1]):
        seg = data[mask, k]
        mean = float(seg.mean())
        fluct = float(np.max(np.abs(seg - mean)))
        flagged = abs(mean) > noise_floor and fluct > rel_tol * abs(mean)
        out.append(Plateau(mean, fluct, (t0, t1), flagged))
    trace.plateau[quantity] = out
    return out


@dataclass
class NessResult:
    trace: EvolutionTrace
    charge: list[Plateau]
    energy: list[Plateau]


def ness_currents(
    spec: SystemSpec,
    L: int | Sequence[int] = 400,
    window: tuple[float, float] = (50.0, 150.0),
    dt: float = 0.5,
) -> NessResult:
    """Plateau charge and energy currents with the default bring-up parameters."""
    sys = build_truncated(spec, L)
    rho0 = initial_density(sys, spec)
    times = np.arange(0.0, window[1] + 0.5 * dt, dt)
    trace = evolve_currents(sys, rho0, times)
    return NessResult(
        trace, extract_plateau(trace, window, "charge"), extract_plateau(trace, window, "energy")
    )


def chain_transmission(
    energy: float,
    hopping: float,
    onsite: float,
    center_onsite: Sequence[float],
    bonds: Sequence[complex],
) -> float:
    """Transmission through a chain junction by transfer-matrix recursion.

    Two identical leads (hopping ``hopping``, i.e. Hamiltonian element
    ``-hopping``) are joined through central sites with energies
    ``center_onsite``.  ``bonds`` are the Hamiltonian elements
    ``<n|H|n+1>`` from the last site of the left lead to the first site of
    the right lead, ``len(center_onsite) + 1`` of them.
    """
    k = np.arccos((onsite - energy) / (2.0 * hopping))
    n_mid = len(center_onsite)

    def bond(x):  # <x|H|x+1>
        return bonds[x] if 0 <= x <= n_mid else -hopping

    def eps(x):
        return center_onsite[x - 1] if 1 <= x <= n_mid else onsite

    # left lead x <= 0, center 1..n_mid, right lead x >= n_mid + 1 carrying exp(ikx)
    psi = {n_mid + 1: np.exp(1j * k * (n_mid + 1)), n_mid + 2: np.exp(1j * k * (n_mid + 2))}
    for x in range(n_mid + 1, -1, -1):
        psi[x - 1] = ((energy - eps(x)) * psi[x] - bond(x) * psi[x + 1]) / np.conj(bond(x - 1))
    # left lead: psi(x) = A exp(ikx) + B exp(-ikx)
    a = (psi[0] * np.exp(1j * k) - psi[-1]) / (np.exp(1j * k) - np.exp(-1j * k))
    return float(1.0 / abs(a) ** 2)


def wavepacket_transmission(
    spec: SystemSpec,
    energy: float,
    source: int = 0,
    width: float = 30.0,
) -> np.ndarray:
    """Probability in each lead after a Gaussian packet from ``source`` has scattered."""
    lead = spec.leads[source]
    cos_k = (lead.onsite - energy) / (2.0 * lead.hopping)
    k = float(np.arccos(cos_k))
    speed = 2.0 * lead.hopping * np.sin(k)
    n0 = 5.0 * width
    L = int(n0 + 5.0 * width) + spec_max_site(spec)
    sys = build_truncated(spec, L)
    sl = sys.lead_slice(source)
    x = np.arange(1, L + 1)
    psi = np.zeros(sys.total_dim, complex)
    psi[sl] = np.exp(-((x - n0) ** 2) / (4.0 * width**2) - 1j * k * x)
    psi /= np.linalg.norm(psi)
    t_final = (n0 + 4.0 * width) / speed
    lam, w = sys.eig
    psi_t = w @ (np.exp(-1j * lam * t_final) * (w.conj().T @ psi))
    prob = np.abs(psi_t) ** 2
    return np.array([prob[sys.lead_slice(j)].sum() for j in range(spec.n_leads)])


def spec_max_site(spec: SystemSpec) -> int:
    return max((spec.max_site(j) for j in range(spec.n_leads)), default=0)
