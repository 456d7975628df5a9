"""Spin-chain Hamiltonians, exact diagonalization and eigenbasis populations.

Qubit 0 is the most significant bit of a computational basis index, so the
dense matrices agree with ``np.kron`` ordering.  ``|1>`` carries sigma^z = -1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

MAX_QUBITS = 12
HERMITICITY_TOL = 1e-10

BOUNDARIES = ("periodic", "open")


class CapacityError(ValueError):
    """Requested object exceeds the configured dense-memory budget."""


class SpectralValidationError(ValueError):
    pass


@dataclass(frozen=True)
class SpinChainSpec:
    n: int
    zz_coupling: float = 1.0
    x_field: float = 1.0
    z_field: float = 1.0
    boundary: str = "periodic"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"qubit count must be a positive integer, got {self.n!r}")
        for name in ("zz_coupling", "x_field", "z_field"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour pairs, wrapping when periodic (n=2 periodic counts the bond twice)."""
        pairs = [(i, i + 1) for i in range(self.n - 1)]
        if self.boundary == "periodic":
            pairs.append((self.n - 1, 0))
        return pairs


def _check_capacity(n: int, max_qubits: int = MAX_QUBITS) -> None:
    if n > max_qubits:
        raise CapacityError(f"{n} qubits exceeds the dense limit of {max_qubits}")


def _z_signs(n: int) -> np.ndarray:
    """(n, 2**n) array of sigma^z eigenvalues, row i for qubit i."""
    idx = np.arange(2**n)
    bits = (idx[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    return 1.0 - 2.0 * bits


def build_zzxz(spec: SpinChainSpec, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Dense sum_i (J Z_i Z_{i+1} + hx X_i + hz Z_i) for the given chain."""
    n = spec.n
    _check_capacity(n, max_qubits)
    dim = 2**n
    z = _z_signs(n)
    diag = spec.z_field * z.sum(axis=0)
    for i, j in spec.bonds():
        diag = diag + spec.zz_coupling * z[i] * z[j]
    h = np.diag(diag)
    if spec.x_field != 0.0:
        idx = np.arange(dim)
        for i in range(n):
            h[idx ^ (1 << (n - 1 - i)), idx] += spec.x_field
    return h


def build_field_z(n: int, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_capacity(n, max_qubits)
    return np.diag(_z_signs(n).sum(axis=0))


def interpolate(h0: np.ndarray, ht: np.ndarray, s: float) -> np.ndarray:
    """Convex path (1 - s) h0 + s ht."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"interpolation parameter must lie in [0, 1], got {s}")
    if h0.shape != ht.shape:
        raise ValueError(f"shape mismatch {h0.shape} vs {ht.shape}")
    if s == 0.0:
        return h0.copy()
    if s == 1.0:
        return ht.copy()
    return (1.0 - s) * h0 + s * ht


def shift_energy(h: np.ndarray, offset: float) -> np.ndarray:
    """Add ``offset * I``; eigenvectors and populations are unchanged."""
    return h + offset * np.eye(h.shape[0], dtype=h.dtype)


def hermiticity_residual(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    target: int = 0
    _gap: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.target < len(self.eigenvalues):
            raise ValueError(f"target level {self.target} out of range")
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)
        others = np.delete(self.eigenvalues, self.target)
        gap = float(np.min(np.abs(others - self.eigenvalues[self.target]))) if others.size else np.inf
        object.__setattr__(self, "_gap", gap)

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)

    @property
    def gap(self) -> float:
        """Smallest separation between the target level and any other level."""
        return self._gap

    def min_spacing(self) -> float:
        return float(np.min(np.diff(self.eigenvalues))) if self.dimension > 1 else np.inf

    def is_target_degenerate(self, tol: float = 1e-9) -> bool:
        return self.gap <= tol * max(1.0, float(np.max(np.abs(self.eigenvalues))))

    def with_target(self, target: int) -> "EigenDecomposition":
        return EigenDecomposition(self.eigenvalues, self.eigenvectors, target)

    def shifted(self, offset: float) -> "EigenDecomposition":
        return EigenDecomposition(self.eigenvalues + offset, self.eigenvectors, self.target)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and positive."""
    mags = np.abs(vecs)
    # first index within rounding of the column maximum; stable across platforms
    pivots = np.argmax(mags >= mags.max(axis=0) - 1e-12, axis=0)
    ref = vecs[pivots, np.arange(vecs.shape[1])]
    phase = ref / np.abs(ref)
    if np.isrealobj(vecs):
        return vecs * np.sign(ref)
    return vecs * phase.conj()


def diagonalize(h: np.ndarray, target: int = 0) -> EigenDecomposition:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise SpectralValidationError(f"expected a square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if hermiticity_residual(h) > HERMITICITY_TOL * scale:
        raise SpectralValidationError("matrix is not Hermitian")
    vals, vecs = np.linalg.eigh(h)
    return EigenDecomposition(vals, _fix_phases(vecs), target)


class MirrorPair(NamedTuple):
    target: int
    partner: int
    residual: float


def detect_spectral_symmetry(ed: EigenDecomposition, tol: float = 1e-9) -> list[MirrorPair]:
    """Levels whose phases are locked to the target's, lambda_j = -lambda_target.

    For such a pair cos(lambda_j tau) == cos(lambda_t tau) for every tau, so the
    random-phase argument that separates the two populations fails and
    convergence plateaus.  A zero target eigenvalue is reported as a self pair
    because its phase never randomizes.  An energy offset removes both cases.
    """
    lam = ed.eigenvalues
    t = ed.target
    scale = max(1.0, float(np.max(np.abs(lam))))
    sums = np.abs(lam + lam[t])
    hits = np.flatnonzero(sums <= tol * scale)
    return [MirrorPair(t, int(j), float(sums[j])) for j in hits]


def overlap_populations(state: np.ndarray, ed: EigenDecomposition) -> np.ndarray:
    """Populations |<phi_j|psi>|^2 of a normalized system state."""
    state = np.asarray(state)
    if state.shape[-1] != ed.dimension:
        raise ValueError(f"state dimension {state.shape[-1]} does not match {ed.dimension}")
    amps = state @ ed.eigenvectors.conj()
    return np.abs(amps) ** 2


def ground_state(h: np.ndarray) -> tuple[float, np.ndarray]:
    ed = diagonalize(h)
    return float(ed.eigenvalues[0]), ed.eigenvectors[:, 0]
