"""Eigenstate filtering by randomized phase estimation.

Exact-diagonalization spin chains, an eigenbasis population engine with a
circuit-level statevector cross-check, closed-form moment analytics, an
adiabatic sweep baseline, and a seeded trajectory harness with a CLI.
"""
from .config import ConfigError, ExperimentConfig
from .eigen_engine import get_map
from .harness import estimate_suppression, run_trajectories
from .spectral import SpinChainSpec, build_zzxz, diagonalize

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SpinChainSpec",
    "build_zzxz",
    "diagonalize",
    "estimate_suppression",
    "get_map",
    "run_trajectories",
]
__version__ = "0.1.0"
