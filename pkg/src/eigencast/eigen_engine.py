"""Population-level process maps for the single- and multi-device protocols.

Controlled evolutions are diagonal in the eigenbasis and every device uses the
same evolution time, so each eigen-configuration ``(i_1, ..., i_p)`` keeps its
own auxiliary-register state and only the populations ``|c_I|^2`` matter.  A
map multiplies each population by an outcome-dependent factor and
renormalizes.

Weight layouts (``*batch`` is any number of leading trajectory axes):

* one device: ``(*batch, N)``
* two devices, full joint: ``(*batch, N, N)`` with axes (Alice, Bob)
* two devices with Alice pinned to eigenstate ``pin``: ``(*batch, N)`` over Bob
* ``p`` devices, full: ``(*batch, N, ..., N)``; Bob is the last device
* ``p`` devices pinned: ``(*batch, N)`` over Bob, every Alice at ``pin``

Factors returned by :meth:`ProcessMap.factors` are the exact outcome
probabilities of each configuration, so they include the constant 1/4 and 1/8
prefactors; those cancel on renormalization.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * np.pi
ZERO_PROBABILITY = 1e-14
MAX_SYMMETRIC_DEVICES = 6
MAX_FULL_CONFIGS = 2**20


class ImpossibleOutcomeError(ValueError):
    """An outcome with (numerically) zero probability was requested."""


class PhaseDraw(NamedTuple):
    tau: np.ndarray
    phases: np.ndarray


class StepOutcome(NamedTuple):
    bits: str
    herald_ok: bool
    probability: float
    factors: np.ndarray


class Dominance(NamedTuple):
    dominant: int
    subdominant: int
    value: float
    tied: bool


def draw_phases(tau, eigenvalues) -> PhaseDraw:
    """phi_j = lambda_j * tau reduced to [0, 2 pi); ``tau`` may be an array."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("evolution time must be non-negative")
    phases = np.mod(np.multiply.outer(tau, np.asarray(eigenvalues, dtype=float)), TWO_PI)
    phases[phases >= TWO_PI] = 0.0
    return PhaseDraw(tau, phases)


def dominance(pop) -> Dominance:
    pop = np.asarray(pop, dtype=float)
    if pop.shape[-1] < 2:
        raise ValueError("dominance needs at least two eigenstates")
    order = np.argsort(-pop, kind="stable")
    d, s = int(order[0]), int(order[1])
    return Dominance(d, s, float(pop[d] - pop[s]), bool(pop[d] == pop[s]))


def sample_outcomes(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling along the last axis; outcomes below 1e-14 are never chosen."""
    p = np.where(probs < ZERO_PROBABILITY, 0.0, probs)
    cum = np.cumsum(p, axis=-1)
    cum = cum / cum[..., -1:]
    return np.sum(np.asarray(u)[..., None] >= cum, axis=-1)


def _pair_phases(phases: np.ndarray, pin: int | None):
    if pin is None:
        return phases[..., :, None], phases[..., None, :]
    return phases[..., pin : pin + 1], phases


@dataclass(frozen=True)
class ProcessMap:
    name: str
    outcomes: tuple[str, ...]
    herald: tuple[bool, ...]
    devices: int

    def index(self, bits) -> int:
        if isinstance(bits, (int, np.integer)):
            return int(bits)
        try:
            return self.outcomes.index(bits)
        except ValueError:
            raise ValueError(f"{bits!r} is not an outcome of {self.name}") from None

    def config_ndim(self, pin: int | None) -> int:
        return 1 if (self.devices == 1 or pin is not None) else self.devices

    def factors(self, phases: np.ndarray, pin: int | None = None) -> np.ndarray:
        raise NotImplementedError

    def distribution(self, weights, phases, pin: int | None = None) -> np.ndarray:
        """Outcome probabilities, shape ``(*batch, n_outcomes)``."""
        weights = np.asarray(weights, dtype=float)
        f = self.factors(np.asarray(phases, dtype=float), pin)
        axes = tuple(range(-self.config_ndim(pin), 0))
        probs = np.sum(f * weights, axis=axes)
        return np.moveaxis(probs, 0, -1)

    def apply(self, weights, phases, outcome, pin: int | None = None) -> np.ndarray:
        """Condition ``weights`` on ``outcome`` (label, index, or per-trajectory index array)."""
        weights = np.asarray(weights, dtype=float)
        f = self.factors(np.asarray(phases, dtype=float), pin)
        nc = self.config_ndim(pin)
        if isinstance(outcome, str):
            sel = f[self.index(outcome)]
        elif np.ndim(outcome) == 0:
            sel = f[int(outcome)]
        else:
            idx = np.asarray(outcome, dtype=np.intp)
            idx = idx.reshape((1,) + idx.shape + (1,) * nc)
            sel = np.take_along_axis(f, idx, axis=0)[0]
        new = weights * sel
        norm = np.sum(new, axis=tuple(range(-nc, 0)), keepdims=True)
        if np.any(norm < ZERO_PROBABILITY):
            raise ImpossibleOutcomeError(f"{self.name}: requested outcome has zero probability")
        return new / norm

    def step_outcomes(self, weights, phases, pin: int | None = None) -> list[StepOutcome]:
        """All outcomes of one step for a single trajectory."""
        f = self.factors(np.asarray(phases, dtype=float), pin)
        probs = self.distribution(weights, phases, pin)
        return [
            StepOutcome(b, h, float(probs[..., k]), f[k])
            for k, (b, h) in enumerate(zip(self.outcomes, self.herald))
        ]

    def step(self, weights, phases, rng: np.random.Generator, pin: int | None = None):
        """Sample an outcome with ``rng`` and return ``(StepOutcome, new_weights)``."""
        probs = self.distribution(weights, phases, pin)
        k = int(sample_outcomes(probs, rng.random()))
        f = self.factors(np.asarray(phases, dtype=float), pin)[k]
        out = StepOutcome(self.outcomes[k], self.herald[k], float(probs[k]), f)
        return out, self.apply(weights, phases, k, pin)


class _Single(ProcessMap):
    def factors(self, phases, pin=None):
        c = np.cos(phases)
        return np.stack([(1 + c) / 2, (1 - c) / 2])


class _Bell(ProcessMap):
    def factors(self, phases, pin=None):
        a, b = _pair_phases(phases, pin)
        cp, cm = np.cos(a + b), np.cos(a - b)
        return np.stack([(1 + cp) / 4, (1 + cm) / 4, (1 - cp) / 4, (1 - cm) / 4])


class _Swap(ProcessMap):
    def factors(self, phases, pin=None):
        a, b = _pair_phases(phases, pin)
        ca, cb = np.cos(a), np.cos(b)
        plus = (1 - np.cos(a + b)) / 8
        anti = (1 - np.cos(a - b)) / 8
        zero = np.zeros(np.broadcast_shapes(ca.shape, cb.shape))
        return np.stack([
            (1 + ca) * (1 + cb) / 4 + zero,
            plus, plus,
            (1 - ca) * (1 - cb) / 4 + zero,
            zero, anti, anti, zero,
        ])


class _Schmidt(ProcessMap):
    def factors(self, phases, pin=None):
        a, b = _pair_phases(phases, pin)
        cm = np.cos(a - b)
        quarter = np.full(cm.shape, 0.25)
        return np.stack([quarter, (1 + cm) / 4, quarter, (1 - cm) / 4])


SINGLE = _Single("single", ("0", "1"), (True, True), 1)
TWO_BELL = _Bell("two_bell", ("00", "01", "11", "10"), (True, True, True, False), 2)
TWO_SWAP = _Swap(
    "two_swap",
    tuple("".join(b) for b in itertools.product("01", repeat=3)),
    (True,) * 4 + (False,) * 4,
    2,
)
SCHMIDT = _Schmidt("schmidt", ("00", "01", "11", "10"), (True, True, True, False), 2)


@lru_cache(maxsize=None)
def permutation_operator(perm: tuple[int, ...]) -> np.ndarray:
    """Qubit permutation on ``len(perm)`` qubits: qubit k is moved to slot perm[k]."""
    p = len(perm)
    dim = 2**p
    out = np.zeros((dim, dim))
    for x in range(dim):
        bits = [(x >> (p - 1 - k)) & 1 for k in range(p)]
        y_bits = [0] * p
        for k, b in enumerate(bits):
            y_bits[perm[k]] = b
        y = int("".join(map(str, y_bits)), 2)
        out[y, x] = 1.0
    return out


@lru_cache(maxsize=None)
def symmetric_projector(p: int) -> np.ndarray:
    """Average of all p! qubit permutations on the 2**p auxiliary space."""
    if p < 1 or p > MAX_SYMMETRIC_DEVICES:
        raise ValueError(f"device count {p} outside 1..{MAX_SYMMETRIC_DEVICES}")
    perms = list(itertools.permutations(range(p)))
    proj = sum(permutation_operator(pm) for pm in perms) / len(perms)
    proj.setflags(write=False)
    return proj


@lru_cache(maxsize=None)
def _hadamard_projector(p: int) -> np.ndarray:
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
    hp = np.ones((1, 1))
    for _ in range(p):
        hp = np.kron(hp, h)
    m = hp @ symmetric_projector(p)
    m.setflags(write=False)
    return m


class _Symmetric(ProcessMap):
    """Fully symmetric projection of p auxiliary qubits, then X-basis readout."""

    def _aux_states(self, phases, pin):
        p = self.devices
        v = np.stack([np.ones_like(phases), np.exp(1j * phases)], axis=-1) / np.sqrt(2)
        if pin is not None:
            alice = v[..., pin, :]
            chi = np.ones(phases.shape[:-1] + (1,), dtype=complex)
            for _ in range(p - 1):
                chi = (chi[..., :, None] * alice[..., None, :]).reshape(phases.shape[:-1] + (-1,))
            chi = chi[..., None, :, None] * v[..., :, None, :]
            return chi.reshape(phases.shape + (2**p,))
        n = phases.shape[-1]
        if n**p > MAX_FULL_CONFIGS:
            raise ValueError(f"full tensor of {n}**{p} configurations exceeds {MAX_FULL_CONFIGS}")
        batch = phases.shape[:-1]
        chi = v
        for k in range(1, p):
            chi = chi[..., :, None, :, None] * v[..., None, :, None, :]
            chi = chi.reshape(batch + (n ** (k + 1), 2 ** (k + 1)))
        return chi.reshape(batch + (n,) * p + (2**p,))

    def factors(self, phases, pin=None):
        chi = self._aux_states(phases, pin)
        amps = chi @ _hadamard_projector(self.devices).T
        ok = np.abs(amps) ** 2
        fail = np.clip(1.0 - ok.sum(axis=-1), 0.0, None)
        f = np.concatenate([ok, fail[..., None]], axis=-1)
        return np.moveaxis(f, -1, 0)


@lru_cache(maxsize=None)
def symmetric_map(p: int) -> ProcessMap:
    if p < 1 or p > MAX_SYMMETRIC_DEVICES:
        raise ValueError(f"device count {p} outside 1..{MAX_SYMMETRIC_DEVICES}")
    labels = tuple("0" + "".join(b) for b in itertools.product("01", repeat=p))
    return _Symmetric(f"symmetric_{p}", labels + ("1" + "x" * p,), (True,) * 2**p + (False,), p)


MAPS = {m.name: m for m in (SINGLE, TWO_BELL, TWO_SWAP, SCHMIDT)}


def get_map(variant: str, devices: int | None = None) -> ProcessMap:
    if variant == "symmetric":
        return symmetric_map(devices or 2)
    try:
        return MAPS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}") from None


def bob_marginal(pmap: ProcessMap, weights: np.ndarray, pin: int | None) -> np.ndarray:
    """Population vector of the last device."""
    nc = pmap.config_ndim(pin)
    if nc == 1:
        return weights
    return weights.sum(axis=tuple(range(-nc, -1)))


# thin functional wrappers, one per protocol operation

def single_step_distribution(pop, phases):
    return SINGLE.distribution(pop, phases)


def single_step_apply(pop, phases, bit):
    return SINGLE.apply(pop, phases, str(bit) if isinstance(bit, (int, np.integer)) else bit)


def two_bell_distribution(joint, phases, pin=None):
    return TWO_BELL.distribution(joint, phases, pin)


def two_bell_apply(joint, phases, bits, pin=None):
    return TWO_BELL.apply(joint, phases, bits, pin)


def two_swap_distribution(joint, phases, pin=None):
    return TWO_SWAP.distribution(joint, phases, pin)


def two_swap_apply(joint, phases, bits, pin=None):
    return TWO_SWAP.apply(joint, phases, bits, pin)


def schmidt_distribution(joint, phases, pin=None):
    return SCHMIDT.distribution(joint, phases, pin)


def schmidt_apply(joint, phases, bits, pin=None):
    return SCHMIDT.apply(joint, phases, bits, pin)


def multi_symmetric_distribution(joint, phases, p, pin=None):
    return symmetric_map(p).distribution(joint, phases, pin)


def multi_symmetric_apply(joint, phases, p, bits, pin=None):
    return symmetric_map(p).apply(joint, phases, bits, pin)


def multi_symmetric_step(joint, phases, p, rng, pin=None):
    return symmetric_map(p).step(joint, phases, rng, pin)
