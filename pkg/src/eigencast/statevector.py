"""Brute-force circuit simulation used as an oracle for the eigenbasis engine.

Amplitudes are stored as a tensor of shape ``(2,) * n_qubits + (dim,) * n_registers``.
Qubit axes come first in the fixed order (helper, aux_1, ..., aux_p) followed
by the system registers (device 1, ..., device p).  Bit strings are reported
in the same order, helper first.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .eigen_engine import ZERO_PROBABILITY, ImpossibleOutcomeError, StepOutcome
from .spectral import EigenDecomposition

SQRT2 = np.sqrt(2.0)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / SQRT2
V_BELL = np.array([[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, -1, 0], [1, 0, 0, -1]]) / SQRT2
V_HADAMARD2 = np.kron(HADAMARD, HADAMARD)
V_SCHMIDT = np.array(
    [[SQRT2, 0, 0, 0], [0, 1, 1, 0], [0, 1, -1, 0], [0, 0, 0, SQRT2]]
) / SQRT2
CONTROLLED_SWAP = np.eye(8)
CONTROLLED_SWAP[[5, 6]] = CONTROLLED_SWAP[[6, 5]]


@lru_cache(maxsize=None)
def dicke_projector(p: int) -> np.ndarray:
    """Projector onto the symmetric subspace as a sum over Dicke states."""
    dim = 2**p
    weights = np.array([bin(x).count("1") for x in range(dim)])
    proj = np.zeros((dim, dim))
    for w in range(p + 1):
        d = (weights == w).astype(float)
        d /= np.linalg.norm(d)
        proj += np.outer(d, d)
    proj.setflags(write=False)
    return proj


AUX_OPERATORS = {
    "V_bell": V_BELL,
    "V_hadamard2": V_HADAMARD2,
    "V_schmidt": V_SCHMIDT,
    "hadamard": HADAMARD,
    "controlled_swap": CONTROLLED_SWAP,
}


def aux_operator(name: str, p: int | None = None) -> np.ndarray:
    if name == "symmetric_projector":
        return dicke_projector(p or 2)
    return AUX_OPERATORS[name]


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int

    @property
    def n_registers(self) -> int:
        return self.amplitudes.ndim - self.n_qubits

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def system(self, bits: str) -> np.ndarray:
        """System tensor on the branch where the qubits read ``bits``."""
        return self.amplitudes[tuple(int(b) for b in bits)]


def with_qubits(system: np.ndarray, n_qubits: int) -> StateVector:
    """Attach ``n_qubits`` auxiliary qubits in |0> to a system tensor."""
    system = np.asarray(system, dtype=complex)
    amps = np.zeros((2,) * n_qubits + system.shape, dtype=complex)
    amps[(0,) * n_qubits] = system
    return StateVector(amps, n_qubits)


def _propagator(ed: EigenDecomposition, tau: float) -> np.ndarray:
    v = ed.eigenvectors
    return (v * np.exp(-1j * ed.eigenvalues * tau)) @ v.conj().T


def _apply_on_axis(amps: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(mat, amps, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def evolve_exact(state: np.ndarray, ed: EigenDecomposition, tau: float) -> np.ndarray:
    """exp(-i H tau) on a single-register state vector."""
    state = np.asarray(state)
    if state.shape[-1] != ed.dimension:
        raise ValueError(f"state dimension {state.shape[-1]} does not match {ed.dimension}")
    v = ed.eigenvectors
    return v @ (np.exp(-1j * ed.eigenvalues * tau) * (v.conj().T @ state))


def controlled_evolution(
    state: StateVector, control: int, register: int, ed: EigenDecomposition, tau: float
) -> StateVector:
    if not 0 <= control < state.n_qubits:
        raise ValueError(f"invalid control qubit {control}")
    if not 0 <= register < state.n_registers:
        raise ValueError(f"invalid register {register}")
    amps = state.amplitudes.copy()
    sl = (slice(None),) * control + (1,)
    # after fixing the control, the register axis shifts down by one
    axis = state.n_qubits - 1 + register
    amps[sl] = _apply_on_axis(amps[sl], _propagator(ed, tau), axis)
    return StateVector(amps, state.n_qubits)


def apply_aux(state: StateVector, op: np.ndarray, targets) -> StateVector:
    targets = list(targets)
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator of shape {op.shape} does not act on {k} qubits")
    if any(not 0 <= t < state.n_qubits for t in targets):
        raise ValueError(f"invalid target qubits {targets}")
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, state.amplitudes, axes=(list(range(k, 2 * k)), targets))
    out = np.moveaxis(out, list(range(k)), targets)
    return StateVector(out, state.n_qubits)


def measure_register(state: StateVector, qubits, rng=None, forced: str | None = None):
    """Computational-basis measurement of ``qubits``; returns (bits, collapsed, probability)."""
    qubits = list(qubits)
    amps = np.moveaxis(state.amplitudes, qubits, list(range(len(qubits))))
    k = len(qubits)
    probs = np.sum(np.abs(amps.reshape(2**k, -1)) ** 2, axis=1)
    if forced is None:
        if rng is None:
            raise ValueError("either rng or a forced outcome is required")
        p = np.where(probs < ZERO_PROBABILITY, 0.0, probs)
        idx = int(rng.choice(2**k, p=p / p.sum()))
        bits = format(idx, f"0{k}b")
    else:
        bits = forced
        idx = int(bits, 2)
        if probs[idx] <= ZERO_PROBABILITY:
            raise ImpossibleOutcomeError(f"forced outcome {bits} has zero probability")
    mask = np.zeros((2,) * k)
    mask[tuple(int(b) for b in bits)] = 1.0
    collapsed = amps * mask.reshape(mask.shape + (1,) * (amps.ndim - k))
    collapsed = np.moveaxis(collapsed, list(range(k)), qubits) / np.sqrt(probs[idx])
    return bits, StateVector(collapsed, state.n_qubits), float(probs[idx])


def project(state: StateVector, projector: np.ndarray, qubits):
    """Apply a projector to ``qubits``; returns (probability, unnormalized state)."""
    out = apply_aux(state, projector, qubits)
    return out.norm() ** 2, out


VARIANT_QUBITS = {"single": 1, "two_bell": 2, "schmidt": 2, "two_swap": 3}


def run_circuit_variant(
    variant: str,
    system: np.ndarray,
    ed: EigenDecomposition,
    tau: float,
    rng=None,
    forced: str | None = None,
    devices: int | None = None,
):
    """One protocol iteration on a pure system tensor of shape ``(N,) * devices``.

    Returns ``(StepOutcome, next_system)``; ``next_system`` is ``None`` on a
    failed symmetric herald, where the system is left entangled with the aux
    register and the run must restart.
    """
    system = np.asarray(system, dtype=complex)
    if variant == "symmetric":
        return _run_symmetric(system, ed, tau, devices or system.ndim, rng, forced)
    nq = VARIANT_QUBITS[variant]
    helper = 1 if variant == "two_swap" else 0
    p = nq - helper
    if system.ndim != p:
        raise ValueError(f"{variant} needs {p} system registers, got {system.ndim}")
    state = with_qubits(system, nq)
    for q in range(nq):
        state = apply_aux(state, HADAMARD, [q])
    for k in range(p):
        state = controlled_evolution(state, helper + k, k, ed, tau)
    if variant == "two_bell":
        state = apply_aux(state, V_BELL, [0, 1])
    elif variant == "schmidt":
        state = apply_aux(state, V_SCHMIDT, [0, 1])
    elif variant == "two_swap":
        state = apply_aux(state, CONTROLLED_SWAP, [0, 1, 2])
        for q in range(3):
            state = apply_aux(state, HADAMARD, [q])
    else:
        state = apply_aux(state, HADAMARD, [0])
    bits, collapsed, prob = measure_register(state, range(nq), rng, forced)
    herald = not (variant == "two_swap" and bits[0] == "1") and not (
        variant in ("two_bell", "schmidt") and bits == "10"
    )
    return StepOutcome(bits, herald, prob, None), collapsed.system(bits)


def _run_symmetric(system, ed, tau, p, rng, forced):
    if system.ndim != p:
        raise ValueError(f"symmetric variant needs {p} system registers, got {system.ndim}")
    state = with_qubits(system, p)
    for q in range(p):
        state = apply_aux(state, HADAMARD, [q])
    for k in range(p):
        state = controlled_evolution(state, k, k, ed, tau)
    p_ok, sym = project(state, dicke_projector(p), range(p))
    fail_label = "1" + "x" * p
    if forced is None:
        ok = rng.random() < p_ok
    else:
        ok = forced != fail_label
    if not ok:
        if 1.0 - p_ok <= ZERO_PROBABILITY:
            raise ImpossibleOutcomeError("symmetric herald cannot fail for this state")
        return StepOutcome(fail_label, False, 1.0 - p_ok, None), None
    if p_ok <= ZERO_PROBABILITY:
        raise ImpossibleOutcomeError("symmetric herald has zero probability")
    sym = StateVector(sym.amplitudes / np.sqrt(p_ok), p)
    for q in range(p):
        sym = apply_aux(sym, HADAMARD, [q])
    bits, collapsed, prob = measure_register(
        sym, range(p), rng, None if forced is None else forced[1:]
    )
    return StepOutcome("0" + bits, True, p_ok * prob, None), collapsed.system(bits)


def joint_populations(system: np.ndarray, ed: EigenDecomposition) -> np.ndarray:
    """|<phi_i1 ... phi_ip | Psi>|^2 for a normalized system tensor."""
    amps = np.asarray(system, dtype=complex)
    vdag = ed.eigenvectors.conj().T
    for axis in range(amps.ndim):
        amps = _apply_on_axis(amps, vdag, axis)
    return np.abs(amps) ** 2


def enumerate_records(variant, system, ed, taus, devices=None):
    """Every measurement record for the fixed evolution times ``taus``.

    Yields ``(bits_tuple, probability, populations_or_None)``; records end early
    at a failed herald.
    """
    labels = _labels(variant, devices or np.asarray(system).ndim)

    def walk(prefix, prob, state, k):
        if k == len(taus):
            yield prefix, prob, joint_populations(state, ed)
            return
        for b in labels:
            try:
                out, nxt = run_circuit_variant(variant, state, ed, taus[k], forced=b, devices=devices)
            except ImpossibleOutcomeError:
                continue
            if nxt is None:
                yield prefix + (b,), prob * out.probability, None
                continue
            if not out.herald_ok:
                yield prefix + (b,), prob * out.probability, None
                continue
            yield from walk(prefix + (b,), prob * out.probability, nxt, k + 1)

    yield from walk((), 1.0, np.asarray(system, dtype=complex), 0)


def _labels(variant, p):
    if variant == "single":
        return ("0", "1")
    if variant in ("two_bell", "schmidt"):
        return ("00", "01", "11", "10")
    if variant == "two_swap":
        return tuple("".join(b) for b in itertools.product("01", repeat=3))
    return tuple("0" + "".join(b) for b in itertools.product("01", repeat=p)) + ("1" + "x" * p,)
