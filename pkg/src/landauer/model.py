"""System description: leads, dot, couplings and reservoir states.

Single-particle Hilbert space layout used throughout the package::

    H = H_dot (+) H_lead_0 (+) ... (+) H_lead_{N-1}

Leads are semi-infinite chains with sites numbered from 1 at the surface.
Lead indices are 0-based in Python and 1-based in configuration files and
output column names.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from landauer.errors import ConfigError, ValidationError

DOT = -1  # block tag for dot components in (block, index) keys

SCHEMA_VERSION = 1
HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class LeadSpec:
    """Semi-infinite single-channel tight-binding reservoir.

    ``H_lead = onsite * 1 - hopping * (shift + shift^*)`` on sites 1, 2, ...,
    held at inverse temperature ``beta`` (``math.inf`` for a step filling)
    and chemical potential ``mu``.
    """

    hopping: float = 1.0
    onsite: float = 0.0
    beta: float = math.inf
    mu: float = 0.0

    @property
    def band(self) -> tuple[float, float]:
        return (self.onsite - 2.0 * self.hopping, self.onsite + 2.0 * self.hopping)

    @property
    def bandwidth(self) -> float:
        return 4.0 * self.hopping


@dataclass(frozen=True, eq=False)
class DotSpec:
    """Finite Hermitian system of dimension ``dim``; ``dim == 0`` is allowed."""

    matrix: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), complex))

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.size == 0:
            m = m.reshape(0, 0)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class CouplingTerm:
    """One Hermitian pair ``amplitude |left><right| + h.c.`` of the coupling V.

    For ``kind == "dot_lead"`` the left vector is a length-``dim`` array on the
    dot and the right vector lives on ``right_lead``.  For ``"lead_lead"``
    the left vector lives on ``left_lead``.  Lead vectors are maps from site
    (>= 1) to amplitude.
    """

    kind: str
    amplitude: complex
    left_vector: np.ndarray | Mapping[int, complex]
    right_vector: Mapping[int, complex]
    right_lead: int
    left_lead: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "right_vector", _freeze_sites(self.right_vector))
        if self.kind == "dot_lead":
            left = np.array(self.left_vector, dtype=complex, copy=True).reshape(-1)
            left.setflags(write=False)
            object.__setattr__(self, "left_vector", left)
        else:
            object.__setattr__(self, "left_vector", _freeze_sites(self.left_vector))

    @classmethod
    def dot_lead(cls, lead, dot_vector, lead_vector, amplitude=1.0):
        return cls("dot_lead", amplitude, dot_vector, lead_vector, right_lead=lead)

    @classmethod
    def lead_lead(cls, lead_a, lead_b, vector_a, vector_b, amplitude=1.0):
        return cls("lead_lead", amplitude, vector_a, vector_b, right_lead=lead_b, left_lead=lead_a)

    def left_entries(self) -> list[tuple[tuple[int, int], complex]]:
        """``((block, index), value)`` pairs of the left vector."""
        if self.kind == "dot_lead":
            return [((DOT, i), complex(v)) for i, v in enumerate(self.left_vector) if v != 0]
        return [((self.left_lead, n), v) for n, v in self.left_vector.items() if v != 0]

    def right_entries(self) -> list[tuple[tuple[int, int], complex]]:
        return [((self.right_lead, n), v) for n, v in self.right_vector.items() if v != 0]


def _freeze_sites(vec) -> dict[int, complex]:
    out = {}
    for site, value in dict(vec).items():
        out[int(site)] = out.get(int(site), 0j) + complex(value)
    return dict(sorted(out.items()))


@dataclass(frozen=True, eq=False)
class SystemSpec:
    leads: tuple[LeadSpec, ...]
    dot: DotSpec = field(default_factory=DotSpec)
    couplings: tuple[CouplingTerm, ...] = ()
    charge: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "leads", tuple(self.leads))
        object.__setattr__(self, "couplings", tuple(self.couplings))

    @property
    def n_leads(self) -> int:
        return len(self.leads)

    def max_site(self, lead: int) -> int:
        """Largest coupling-site index on ``lead`` (0 if the lead is untouched)."""
        sites = [n for (block, n), _ in _all_entries(self) if block == lead]
        return max(sites, default=0)


def _all_entries(spec: SystemSpec):
    for term in spec.couplings:
        yield from term.left_entries()
        yield from term.right_entries()


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(spec: SystemSpec) -> ValidationReport:
    """Collect every invariant violation; errors block computation, warnings do not."""
    rep = ValidationReport()
    n = len(spec.leads)
    if n < 2:
        rep.errors.append(f"at least two leads are required, got {n}")
    for j, lead in enumerate(spec.leads):
        tag = f"lead {j + 1}"
        if not (np.isfinite(lead.hopping) and lead.hopping > 0):
            rep.errors.append(f"{tag}: lead hopping must be positive (got {lead.hopping!r})")
        if not np.isfinite(lead.onsite):
            rep.errors.append(f"{tag}: onsite energy must be finite")
        if math.isnan(lead.beta) or lead.beta <= 0:
            rep.errors.append(f"{tag}: beta must be positive or inf (got {lead.beta!r})")
        if not np.isfinite(lead.mu):
            rep.errors.append(f"{tag}: chemical potential must be finite")
    if not (np.isfinite(spec.charge) and spec.charge > 0):
        rep.errors.append(f"charge must be positive (got {spec.charge!r})")

    h = spec.dot.matrix
    m = spec.dot.dim
    if h.shape != (m, m):
        rep.errors.append(f"dot matrix must be square, got shape {h.shape}")
    elif m:
        if not np.all(np.isfinite(h)):
            rep.errors.append("dot matrix has non-finite entries")
        else:
            tol = HERMITIAN_RTOL * max(1.0, float(np.abs(h).max()))
            bad = np.argwhere(np.abs(h - h.conj().T) > tol)
            for a, b in bad:
                if a <= b:
                    rep.errors.append(
                        f"dot matrix not Hermitian at entries ({a + 1},{b + 1})/({b + 1},{a + 1}): "
                        f"mismatch {abs(h[a, b] - np.conj(h[b, a])):.3e}"
                    )

    for i, term in enumerate(spec.couplings):
        tag = f"coupling {i + 1}"
        if term.kind not in ("dot_lead", "lead_lead"):
            rep.errors.append(f"{tag}: unknown kind {term.kind!r}")
            continue
        if not np.isfinite(term.amplitude):
            rep.errors.append(f"{tag}: amplitude must be finite")
        leads = [term.right_lead] + ([term.left_lead] if term.kind == "lead_lead" else [])
        for lead in leads:
            if lead is None or not 0 <= lead < n:
                rep.errors.append(f"{tag}: lead index {_label(lead)} out of range 1..{n}")
        if term.kind == "lead_lead" and term.left_lead == term.right_lead:
            rep.errors.append(f"{tag}: lead_lead coupling must join two distinct leads")
        if term.kind == "dot_lead":
            if m == 0:
                rep.errors.append(f"{tag}: dot_lead coupling needs a dot of positive dimension")
            elif term.left_vector.shape != (m,):
                rep.errors.append(
                    f"{tag}: dot vector has length {term.left_vector.size}, expected {m}"
                )
            lead_vectors = [term.right_vector]
        else:
            lead_vectors = [term.left_vector, term.right_vector]
        for vec in lead_vectors:
            if any(site < 1 for site in vec):
                rep.errors.append(f"{tag}: lead sites must be >= 1")
            if not all(np.isfinite(v) for v in vec.values()):
                rep.errors.append(f"{tag}: lead vector has non-finite entries")
        if not term.left_entries() or not term.right_entries() or term.amplitude == 0:
            rep.warnings.append(f"{tag}: vanishing term contributes nothing to V")

    if rep.ok and n >= 2:
        rep.warnings.extend(_connectivity_warnings(spec))
    return rep


def _label(lead):
    return "None" if lead is None else str(lead + 1)


def _connectivity_warnings(spec: SystemSpec) -> list[str]:
    live = [t for t in spec.couplings if t.amplitude != 0 and t.left_entries() and t.right_entries()]
    if not live:
        return ["leads are disconnected; all currents will be zero"]
    # the dot is treated as one node
    parent = list(range(len(spec.leads) + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    dot_node = len(spec.leads)
    for t in live:
        a = dot_node if t.kind == "dot_lead" else t.left_lead
        parent[find(a)] = find(t.right_lead)
    out = []
    n = len(spec.leads)
    for j in range(n):
        for k in range(j + 1, n):
            if find(j) != find(k):
                out.append(f"leads {j + 1} and {k + 1} are not connected by any coupling path")
    return out


def checked(spec: SystemSpec) -> SystemSpec:
    """Raise :class:`ValidationError` on errors; return the spec with an exactly Hermitian dot."""
    rep = validate(spec)
    if not rep.ok:
        raise ValidationError(rep.errors)
    h = spec.dot.matrix
    return replace(spec, dot=DotSpec(0.5 * (h + h.conj().T)))


def spectral_intersection(spec: SystemSpec, leads: Iterable[int]) -> list[tuple[float, float]]:
    """Intersection of the closed bands of ``leads`` as a list of closed intervals."""
    leads = list(leads)
    if not leads:
        return []
    lo = max(spec.leads[j].band[0] for j in leads)
    hi = min(spec.leads[j].band[1] for j in leads)
    return [(lo, hi)] if lo <= hi else []


def coupling_form(spec: SystemSpec, x: Mapping, y: Mapping) -> complex:
    """``<x, V y>`` for finitely supported vectors keyed by ``(block, index)``.

    Evaluated directly from the rank-one pairs, without assembling a matrix.
    """
    total = 0j
    for term in spec.couplings:
        left, right = term.left_entries(), term.right_entries()
        x_l = sum(np.conj(x.get(key, 0)) * v for key, v in left)
        x_r = sum(np.conj(x.get(key, 0)) * v for key, v in right)
        r_y = sum(np.conj(v) * y.get(key, 0) for key, v in right)
        l_y = sum(np.conj(v) * y.get(key, 0) for key, v in left)
        total += term.amplitude * x_l * r_y + np.conj(term.amplitude) * x_r * l_y
    return complex(total)


# -- configuration files --------------------------------------------------------


def _pair(value, where) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{where}: expected a number or an [re, im] pair, got {value!r}")


def _real(value, where) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _require(d: Mapping, key: str, where: str):
    if not isinstance(d, Mapping):
        raise ConfigError(f"{where}: expected an object")
    if key not in d:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return d[key]


def _sites(d, where) -> dict[int, complex]:
    if not isinstance(d, Mapping):
        raise ConfigError(f"{where}: expected a map from site to [re, im]")
    out = {}
    for k, v in d.items():
        try:
            site = int(k)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: site key {k!r} is not an integer") from None
        out[site] = _pair(v, f"{where}[{k}]")
    return out


def _lead_index(value, where) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: lead number must be an integer")
    return value - 1


def spec_from_dict(d: Mapping) -> SystemSpec:
    """Build a :class:`SystemSpec` from the JSON tree; raises :class:`ConfigError`."""
    schema = _require(d, "schema", "config")
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"config: unsupported schema {schema!r} (expected {SCHEMA_VERSION})")
    raw_leads = _require(d, "leads", "config")
    if not isinstance(raw_leads, list):
        raise ConfigError("config: 'leads' must be a list")
    leads = []
    for i, lead in enumerate(raw_leads):
        where = f"leads[{i}]"
        leads.append(
            LeadSpec(
                hopping=_real(_require(lead, "hopping", where), f"{where}.hopping"),
                onsite=_real(lead.get("onsite", 0.0), f"{where}.onsite"),
                beta=_real(_require(lead, "beta", where), f"{where}.beta"),
                mu=_real(_require(lead, "mu", where), f"{where}.mu"),
            )
        )

    raw_dot = _require(d, "dot", "config")
    dim = _require(raw_dot, "dim", "dot")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 0:
        raise ConfigError("dot.dim: expected a non-negative integer")
    flat = raw_dot.get("matrix", [])
    if not isinstance(flat, list) or len(flat) != dim * dim:
        raise ConfigError(f"dot.matrix: expected {dim * dim} row-major [re, im] entries")
    matrix = np.array([_pair(v, f"dot.matrix[{i}]") for i, v in enumerate(flat)], complex)
    dot = DotSpec(matrix.reshape(dim, dim))

    raw_couplings = _require(d, "couplings", "config")
    if not isinstance(raw_couplings, list):
        raise ConfigError("config: 'couplings' must be a list")
    terms = []
    for i, c in enumerate(raw_couplings):
        where = f"couplings[{i}]"
        kind = _require(c, "kind", where)
        amp = _pair(c.get("amplitude", 1.0), f"{where}.amplitude")
        right_lead = _lead_index(_require(c, "right_lead", where), f"{where}.right_lead")
        right = _sites(_require(c, "right_vector", where), f"{where}.right_vector")
        left_raw = _require(c, "left_vector", where)
        if kind == "dot_lead":
            if not isinstance(left_raw, list):
                raise ConfigError(f"{where}.left_vector: expected a list of [re, im] pairs")
            left = [_pair(v, f"{where}.left_vector[{j}]") for j, v in enumerate(left_raw)]
            terms.append(CouplingTerm("dot_lead", amp, left, right, right_lead=right_lead))
        elif kind == "lead_lead":
            left_lead = _lead_index(_require(c, "left_lead", where), f"{where}.left_lead")
            left = _sites(left_raw, f"{where}.left_vector")
            terms.append(CouplingTerm("lead_lead", amp, left, right, right_lead, left_lead))
        else:
            raise ConfigError(f"{where}.kind: expected 'dot_lead' or 'lead_lead', got {kind!r}")

    charge = _real(d.get("charge", 1.0), "charge")
    return SystemSpec(tuple(leads), dot, tuple(terms), charge)


def _pair_out(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def spec_to_dict(spec: SystemSpec) -> dict:
    couplings = []
    for t in spec.couplings:
        c = {
            "kind": t.kind,
            "amplitude": _pair_out(t.amplitude),
            "right_lead": t.right_lead + 1,
            "right_vector": {str(n): _pair_out(v) for n, v in t.right_vector.items()},
        }
        if t.kind == "dot_lead":
            c["left_vector"] = [_pair_out(v) for v in t.left_vector]
        else:
            c["left_lead"] = t.left_lead + 1
            c["left_vector"] = {str(n): _pair_out(v) for n, v in t.left_vector.items()}
        couplings.append(c)
    return {
        "schema": SCHEMA_VERSION,
        "charge": spec.charge,
        "leads": [
            {
                "hopping": lead.hopping,
                "onsite": lead.onsite,
                "beta": "inf" if math.isinf(lead.beta) else lead.beta,
                "mu": lead.mu,
            }
            for lead in spec.leads
        ],
        "dot": {
            "dim": spec.dot.dim,
            "matrix": [_pair_out(v) for v in spec.dot.matrix.reshape(-1)],
        },
        "couplings": couplings,
    }


def load_config(path: str | Path) -> SystemSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return spec_from_dict(tree)


def dump_config(spec: SystemSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n")

