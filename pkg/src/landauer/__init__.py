"""Landauer-Buttiker currents for tight-binding junctions, checked against NESS time evolution."""
from landauer.model import (
    CouplingTerm,
    DotSpec,
    LeadSpec,
    SystemSpec,
    checked,
    load_config,
    spectral_intersection,
    validate,
)
from landauer.benchmarks import resonant_level
from landauer.oracle import build_truncated, evolve_currents, extract_plateau, ness_currents
from landauer.scattering import build_coupling_space, solve_scattering, transmission_probability
from landauer.transport import QuadratureConfig, charge_current, currents, energy_current

__all__ = [
    "CouplingTerm",
    "DotSpec",
    "LeadSpec",
    "QuadratureConfig",
    "SystemSpec",
    "build_coupling_space",
    "build_truncated",
    "charge_current",
    "checked",
    "currents",
    "energy_current",
    "evolve_currents",
    "extract_plateau",
    "load_config",
    "ness_currents",
    "resonant_level",
    "solve_scattering",
    "spectral_intersection",
    "transmission_probability",
    "validate",
]
