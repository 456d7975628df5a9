"""Cross-engine checks: enumerated measurement records, engine vs circuit simulation."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import statevector as sv
from .eigen_engine import draw_phases, get_map
from .spectral import EigenDecomposition, SpinChainSpec, build_zzxz, diagonalize, shift_energy

VALIDATION_CASES = (
    ("single", 1),
    ("two_bell", 2),
    ("two_swap", 2),
    ("schmidt", 2),
    ("symmetric", 2),
    ("symmetric", 3),
)


class OracleReport(NamedTuple):
    variant: str
    devices: int
    records: int
    total_probability: float
    max_probability_error: float
    max_population_error: float

    def passed(self, tol: float = 1e-9) -> bool:
        return (
            self.max_probability_error <= tol
            and self.max_population_error <= tol
            and abs(self.total_probability - 1.0) <= tol
        )


def random_product_state(n_dim: int, devices: int, rng: np.random.Generator) -> np.ndarray:
    state = None
    for _ in range(devices):
        v = rng.normal(size=n_dim) + 1j * rng.normal(size=n_dim)
        v /= np.linalg.norm(v)
        state = v if state is None else np.multiply.outer(state, v)
    return state


def compare_engines(
    variant: str,
    devices: int,
    ed: EigenDecomposition,
    system: np.ndarray,
    taus,
) -> OracleReport:
    """Enumerate every record for fixed ``taus`` and compare probabilities and populations."""
    pmap = get_map(variant, devices)
    w0 = sv.joint_populations(system, ed)
    phases = [draw_phases(t, ed.eigenvalues).phases for t in taus]
    n_rec = 0
    total = 0.0
    perr = poperr = 0.0
    for bits, prob, pops in sv.enumerate_records(
        variant, system, ed, taus, devices=devices if variant == "symmetric" else None
    ):
        n_rec += 1
        total += prob
        w = w0
        p_engine = 1.0
        for k, b in enumerate(bits):
            p_engine *= float(pmap.distribution(w, phases[k])[pmap.index(b)])
            if pops is not None or k < len(bits) - 1:
                w = pmap.apply(w, phases[k], b)
        perr = max(perr, abs(p_engine - prob))
        if pops is not None:
            poperr = max(poperr, float(np.max(np.abs(w - pops))))
    return OracleReport(variant, devices, n_rec, total, perr, poperr)


def cross_validate(n: int = 2, rounds: int = 2, seed: int = 0, cases=VALIDATION_CASES, offset: float = 0.3):
    """Run :func:`compare_engines` for every variant on an open ZZXZ chain."""
    rng = np.random.default_rng(seed)
    h = shift_energy(build_zzxz(SpinChainSpec(n, boundary="open")), offset)
    ed = diagonalize(h)
    reports = []
    for variant, p in cases:
        system = random_product_state(ed.dimension, p, rng)
        taus = rng.uniform(0.0, 4.0 * np.pi / ed.gap, size=rounds)
        reports.append(compare_engines(variant, p, ed, system, taus))
    return reports
