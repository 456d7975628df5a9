"""Experiment configuration: JSON schema, validation and resolution to arrays.

Schema (all keys optional except ``hamiltonian``)::

    {
      "hamiltonian": {"n": 3, "zz_coupling": 1.0, "x_field": 1.0,
                      "z_field": 1.0, "boundary": "periodic"}
                     | {"file": "h.npy"},
      "energy_offset": 0.0,
      "target": 0,
      "variant": "single" | "two_bell" | "two_swap" | "schmidt" | "symmetric",
      "devices": 2,                       # symmetric variant only
      "alice": "pinned" | <initial spec>,  # multi-device variants
      "initial": <initial spec>,          # the single device, or Bob
      "iterations": 100,
      "trajectories": 1000,
      "tau_max": null,                    # default 4 pi / gap
      "seed": 0,
      "restart_policy": "restart_on_herald_fail" | "record_and_continue",
      "near_convergent_threshold": 0.99,
      "convergence_tol": 1e-3,
      "workers": 1
    }

Initial specs::

    {"kind": "populations", "populations": [...]}
    {"kind": "ground_overlap", "gamma_sq": 0.8, "residual": "uniform" | "next" | [...]}
    {"kind": "eigenstate"}
    {"kind": "qaa", "total_time": 8.0, "steps_per_time": 10, "schedule": "smoothstep"}
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .adiabatic import SweepConfig, run_qaa
from .eigen_engine import MAX_SYMMETRIC_DEVICES
from .spectral import (
    EigenDecomposition,
    SpinChainSpec,
    build_field_z,
    build_zzxz,
    diagonalize,
    overlap_populations,
    shift_energy,
)

VARIANTS = ("single", "two_bell", "two_swap", "schmidt", "symmetric")
RESTART_POLICIES = ("restart_on_herald_fail", "record_and_continue")
INITIAL_KINDS = ("populations", "ground_overlap", "eigenstate", "qaa")
FIXED_DEVICES = {"single": 1, "two_bell": 2, "two_swap": 2, "schmidt": 2}


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    hamiltonian: dict
    variant: str = "single"
    devices: int | None = None
    alice: Any = "pinned"
    initial: dict = field(default_factory=lambda: {"kind": "ground_overlap", "gamma_sq": 0.99})
    iterations: int = 100
    trajectories: int = 1000
    tau_max: float | None = None
    seed: int = 0
    restart_policy: str = "restart_on_herald_fail"
    near_convergent_threshold: float = 0.99
    convergence_tol: float = 1e-3
    energy_offset: float = 0.0
    target: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        p = self.device_count
        if self.variant != "symmetric" and self.devices not in (None, p):
            raise ConfigError(f"variant {self.variant} uses {p} devices, got devices={self.devices}")
        if self.variant == "symmetric" and not 1 <= p <= MAX_SYMMETRIC_DEVICES:
            raise ConfigError(f"symmetric variant supports 1..{MAX_SYMMETRIC_DEVICES} devices")
        if not isinstance(self.iterations, int) or self.iterations < 1:
            raise ConfigError("iterations must be a positive integer")
        if not isinstance(self.trajectories, int) or self.trajectories < 1:
            raise ConfigError("trajectories must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if self.restart_policy not in RESTART_POLICIES:
            raise ConfigError(f"restart_policy must be one of {RESTART_POLICIES}")
        if self.tau_max is not None and not self.tau_max > 0:
            raise ConfigError("tau_max must be positive")
        if not 0.0 < self.near_convergent_threshold <= 1.0:
            raise ConfigError("near_convergent_threshold must lie in (0, 1]")
        if not 0.0 < self.convergence_tol < 1.0:
            raise ConfigError("convergence_tol must lie in (0, 1)")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if not isinstance(self.hamiltonian, dict):
            raise ConfigError("hamiltonian must be an object")
        _check_initial(self.initial, "initial")
        if self.alice != "pinned":
            _check_initial(self.alice, "alice")

    @property
    def device_count(self) -> int:
        if self.variant == "symmetric":
            return self.devices or 2
        return FIXED_DEVICES[self.variant]

    @property
    def pinned(self) -> bool:
        return self.device_count > 1 and self.alice == "pinned"

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        try:
            return replace(self, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        if "hamiltonian" not in data:
            raise ConfigError("configuration requires a 'hamiltonian' entry")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        cfg = cls.from_dict(data)
        ham = cfg.hamiltonian
        if "file" in ham and not Path(ham["file"]).is_absolute():
            ham = {**ham, "file": str(path.parent / ham["file"])}
            cfg = replace(cfg, hamiltonian=ham)
        return cfg


def _check_initial(spec, name):
    if not isinstance(spec, dict) or spec.get("kind") not in INITIAL_KINDS:
        raise ConfigError(f"{name} must be an object with kind in {INITIAL_KINDS}")
    kind = spec["kind"]
    if kind == "populations" and "populations" not in spec:
        raise ConfigError(f"{name}: 'populations' list required")
    if kind == "ground_overlap":
        g = spec.get("gamma_sq")
        if g is None or not 0.0 <= g <= 1.0:
            raise ConfigError(f"{name}: gamma_sq must lie in [0, 1]")
    if kind == "qaa" and not spec.get("total_time", 0) > 0:
        raise ConfigError(f"{name}: qaa total_time must be positive")


def chain_spec(ham: dict) -> SpinChainSpec:
    keys = {"n", "zz_coupling", "x_field", "z_field", "boundary"}
    try:
        return SpinChainSpec(**{k: v for k, v in ham.items() if k in keys})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"hamiltonian: {exc}") from None


def build_hamiltonian(ham: dict) -> np.ndarray:
    if "file" in ham:
        try:
            h = np.load(ham["file"])
        except OSError as exc:
            raise ConfigError(f"cannot load Hamiltonian from {ham['file']}: {exc}") from None
        return np.asarray(h)
    return build_zzxz(chain_spec(ham))


def resolve_spectrum(cfg: ExperimentConfig) -> tuple[np.ndarray, EigenDecomposition]:
    """Hamiltonian (with offset) and its eigendecomposition targeted at ``cfg.target``."""
    h = build_hamiltonian(cfg.hamiltonian)
    if cfg.energy_offset:
        h = shift_energy(h, cfg.energy_offset)
    try:
        ed = diagonalize(h, cfg.target)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return h, ed


def resolve_populations(spec: dict, ed: EigenDecomposition, ham: dict | None = None) -> np.ndarray:
    """Eigenbasis population vector described by an initial-state spec."""
    n = ed.dimension
    t = ed.target
    kind = spec["kind"]
    if kind == "populations":
        pop = np.asarray(spec["populations"], dtype=float)
        if pop.shape != (n,):
            raise ConfigError(f"populations must have length {n}")
        if np.any(pop < 0) or abs(pop.sum() - 1.0) > 1e-9:
            raise ConfigError("populations must be nonnegative and sum to 1")
        return pop / pop.sum()
    if kind == "eigenstate":
        pop = np.zeros(n)
        pop[t] = 1.0
        return pop
    if kind == "ground_overlap":
        g = float(spec["gamma_sq"])
        residual = spec.get("residual", "uniform")
        others = np.delete(np.arange(n), t)
        rest = np.zeros(n - 1)
        if residual == "uniform":
            rest[:] = 1.0 / (n - 1)
        elif residual == "next":
            rest[np.argmin(np.abs(ed.eigenvalues[others] - ed.eigenvalues[t]))] = 1.0
        else:
            rest = np.asarray(residual, dtype=float)
            if rest.shape != (n - 1,) or np.any(rest < 0) or rest.sum() <= 0:
                raise ConfigError(f"residual must be 'uniform', 'next' or {n - 1} nonnegative weights")
            rest = rest / rest.sum()
        pop = np.zeros(n)
        pop[t] = g
        pop[others] = (1.0 - g) * rest
        return pop
    if kind == "qaa":
        if ham is None or "n" not in ham:
            raise ConfigError("qaa initial state requires a spin-chain hamiltonian")
        spec_chain = chain_spec(ham)
        ht = build_zzxz(spec_chain)
        steps = max(1, int(np.ceil(spec.get("steps_per_time", 10) * spec["total_time"])))
        res = run_qaa(
            SweepConfig(build_field_z(spec_chain.n), ht, float(spec["total_time"]), steps,
                        spec.get("schedule", "smoothstep"))
        )
        pop = overlap_populations(res.final_state, ed)
        return pop / pop.sum()
    raise ConfigError(f"unknown initial kind {kind!r}")
