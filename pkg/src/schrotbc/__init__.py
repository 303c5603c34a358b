"""Spectral solvers for the free Schrödinger equation on rectangles with
transparent and high-frequency boundary conditions."""

from .exact import Profile, energy_content, profile_from_table
from .harness import RunConfig, run_convergence, run_evolution
from .hf import HFConfig, HFSolver
from .spectral import DomainMap, SpectralSpace
from .tbc import TBCConfig, TBCSolver

__version__ = "0.1.0"

__all__ = [
    "DomainMap", "HFConfig", "HFSolver", "Profile", "RunConfig", "SpectralSpace",
    "TBCConfig", "TBCSolver", "energy_content", "profile_from_table",
    "run_convergence", "run_evolution",
]
