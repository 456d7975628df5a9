"""Trajectory sampling, convergence classification and suppression statistics.

Randomness: trajectory ``i`` draws from
``PCG64(SeedSequence(seed, spawn_key=(i,)))`` and takes a ``(iterations, 2)``
block of uniforms up front (column 0 scales tau, column 1 picks the outcome).
Trajectories are simulated in fixed chunks of ``CHUNK`` rows; chunks may run
on any number of worker threads and are merged by index, so results do not
depend on the worker count.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .config import ConfigError, ExperimentConfig, resolve_populations, resolve_spectrum
from .eigen_engine import ProcessMap, TWO_PI, bob_marginal, get_map, sample_outcomes
from .spectral import EigenDecomposition, detect_spectral_symmetry

CHUNK = 256
BOOTSTRAP = 1000


@dataclass(frozen=True)
class Experiment:
    """A configuration resolved to arrays."""

    cfg: ExperimentConfig
    ed: EigenDecomposition
    pmap: ProcessMap
    pin: int | None
    initial: np.ndarray  # joint weights, layout per the engine
    tau_max: float

    @property
    def bob_initial(self) -> np.ndarray:
        return bob_marginal(self.pmap, self.initial, self.pin)


def prepare(cfg: ExperimentConfig) -> Experiment:
    _, ed = resolve_spectrum(cfg)
    if ed.is_target_degenerate():
        raise ConfigError(f"target level {ed.target} is degenerate; the protocol cannot resolve it")
    if detect_spectral_symmetry(ed):
        warnings.warn(
            "target eigenvalue is mirrored in the spectrum; convergence may plateau "
            "(set energy_offset to break the symmetry)",
            stacklevel=2,
        )
    p = cfg.device_count
    pmap = get_map(cfg.variant, p)
    bob = resolve_populations(cfg.initial, ed, cfg.hamiltonian)
    if p == 1:
        w0, pin = bob, None
    elif cfg.pinned:
        w0, pin = bob, ed.target
    else:
        alice = resolve_populations(cfg.alice, ed, cfg.hamiltonian)
        w0 = alice
        for _ in range(p - 2):
            w0 = np.multiply.outer(w0, alice)
        w0, pin = np.multiply.outer(w0, bob), None
    tau_max = cfg.tau_max if cfg.tau_max is not None else 4.0 * np.pi / ed.gap
    return Experiment(cfg, ed, pmap, pin, w0, float(tau_max))


def trajectory_uniforms(seed: int, index: int, iterations: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss)).random((iterations, 2))


def _top_two(bob: np.ndarray):
    order = np.argsort(-bob, axis=-1, kind="stable")[..., :2]
    rows = np.arange(bob.shape[0])
    return order[:, 0], order[:, 1], rows


COLUMNS = ("tau", "outcome", "herald", "w_dominant", "ratio", "dominant", "w_target", "step_ratio", "restart")


def _simulate_chunk(exp: Experiment, start: int, stop: int) -> dict:
    cfg = exp.cfg
    pmap, pin = exp.pmap, exp.pin
    K = cfg.iterations
    T = stop - start
    u = np.stack([trajectory_uniforms(cfg.seed, i, K) for i in range(start, stop)])
    lam = exp.ed.eigenvalues
    herald_of = np.asarray(pmap.herald)
    restart_on_fail = cfg.restart_policy == "restart_on_herald_fail"

    w = np.broadcast_to(exp.initial, (T,) + exp.initial.shape).copy()
    out = {
        "tau": np.empty((T, K)),
        "outcome": np.empty((T, K), dtype=np.int16),
        "herald": np.empty((T, K), dtype=bool),
        "w_dominant": np.empty((T, K)),
        "ratio": np.empty((T, K)),
        "dominant": np.empty((T, K), dtype=np.int32),
        "w_target": np.empty((T, K)),
        "step_ratio": np.empty((T, K)),
        "restart": np.empty((T, K), dtype=bool),
    }
    bob = bob_marginal(pmap, w, pin)
    d, s, rows = _top_two(bob)
    prev_pair = bob[rows, s] / bob[rows, d]
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(K):
            tau = u[:, k, 0] * exp.tau_max
            phases = np.mod(np.multiply.outer(tau, lam), TWO_PI)
            probs = pmap.distribution(w, phases, pin)
            idx = sample_outcomes(probs, u[:, k, 1])
            w = pmap.apply(w, phases, idx, pin)
            herald = herald_of[idx]
            restart = ~herald if restart_on_fail else np.zeros(T, dtype=bool)
            if restart.any():
                w[restart] = exp.initial
            bob = bob_marginal(pmap, w, pin)
            # ratio change of the pair that was (dominant, subdominant) before this round
            step = (bob[rows, s] / bob[rows, d]) / prev_pair
            step[~(np.isfinite(step) & herald & ~restart)] = np.nan
            d, s, _ = _top_two(bob)
            wd = bob[rows, d]
            pair = bob[rows, s] / wd
            out["tau"][:, k] = tau
            out["outcome"][:, k] = idx
            out["herald"][:, k] = herald
            out["w_dominant"][:, k] = wd
            out["ratio"][:, k] = pair
            out["dominant"][:, k] = d
            out["w_target"][:, k] = bob[:, exp.ed.target]
            out["step_ratio"][:, k] = step
            out["restart"][:, k] = restart
            prev_pair = pair
    out["final"] = bob
    return out


@dataclass(frozen=True)
class TrajectoryRecord:
    trajectory_id: int
    tau: np.ndarray
    bits: tuple
    herald: np.ndarray
    w_dominant: np.ndarray
    ratio: np.ndarray
    dominant: np.ndarray
    w_target: np.ndarray
    step_ratio: np.ndarray
    restart: np.ndarray
    initial_dominant: int = 0

    @property
    def restarts(self) -> int:
        return int(np.sum(self.restart))

    @property
    def iterations(self) -> int:
        return len(self.tau)


@dataclass(frozen=True)
class RecordSet:
    """Columnar store of many trajectories, arrays of shape (trajectories, iterations)."""

    labels: tuple
    trajectory_id: np.ndarray
    columns: dict
    initial_dominant: int = 0
    initial_w_dominant: float = 1.0
    final: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.trajectory_id)

    @property
    def iterations(self) -> int:
        return self.columns["tau"].shape[1] if len(self) else 0

    def __getattr__(self, name):
        cols = self.__dict__.get("columns", {})
        if name in cols:
            return cols[name]
        raise AttributeError(name)

    def bits(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=object)[self.columns["outcome"]]

    def record(self, i: int) -> TrajectoryRecord:
        c = self.columns
        return TrajectoryRecord(
            int(self.trajectory_id[i]),
            c["tau"][i],
            tuple(self.labels[j] for j in c["outcome"][i]),
            c["herald"][i],
            c["w_dominant"][i],
            c["ratio"][i],
            c["dominant"][i],
            c["w_target"][i],
            c["step_ratio"][i],
            c["restart"][i],
            self.initial_dominant,
        )

    def records(self):
        for i in range(len(self)):
            yield self.record(i)


def run_trajectories(cfg: ExperimentConfig, workers: int | None = None) -> RecordSet:
    exp = prepare(cfg)
    n = cfg.trajectories
    starts = list(range(0, n, CHUNK))
    workers = workers or cfg.workers

    def job(a):
        return _simulate_chunk(exp, a, min(a + CHUNK, n))

    if workers == 1:
        parts = [job(a) for a in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, starts))
    cols = {c: np.concatenate([p[c] for p in parts]) for c in COLUMNS}
    bob0 = exp.bob_initial
    d0 = int(np.argsort(-bob0, kind="stable")[0])
    return RecordSet(
        tuple(exp.pmap.outcomes),
        np.arange(n),
        cols,
        d0,
        float(bob0[d0]),
        np.concatenate([p["final"] for p in parts]),
        {"tau_max": exp.tau_max, "gap": exp.ed.gap, "variant": cfg.variant,
         "devices": cfg.device_count, "target": exp.ed.target},
    )


# --- classification --------------------------------------------------------

class Classification(NamedTuple):
    kind: str  # converged | lost_dominance | exhausted
    index: int | None
    crossing: int | None


def classify_convergence(record, tol: float = 1e-3, initial_dominant: int | None = None) -> Classification:
    """Terminal state of one trajectory.

    ``crossing`` is the first iteration whose dominant index differs from the
    initial one.  A trajectory whose final dominant weight is at least
    ``1 - tol`` is converged (crossing still reported); otherwise it lost
    dominance if a crossing occurred and exhausted its budget if not.
    """
    wd = np.asarray(record.w_dominant)
    dom = np.asarray(record.dominant)
    if initial_dominant is None:
        initial_dominant = getattr(record, "initial_dominant", int(dom[0]) if len(dom) else 0)
    crossed = np.flatnonzero(dom != initial_dominant)
    crossing = int(crossed[0]) if crossed.size else None
    if len(wd) and wd[-1] >= 1.0 - tol:
        return Classification("converged", int(dom[-1]), crossing)
    if crossing is not None:
        return Classification("lost_dominance", int(dom[-1]), crossing)
    return Classification("exhausted", None, None)


def classify_all(rs: RecordSet, tol: float = 1e-3) -> list[Classification]:
    return [classify_convergence(r, tol) for r in rs.records()]


# --- suppression statistics ------------------------------------------------

class SuppressionEstimate(NamedTuple):
    geometric_mean: float
    ci_low: float
    ci_high: float
    rounds: int


class Trace(NamedTuple):
    mean: np.ndarray
    std: np.ndarray
    sem: np.ndarray


@dataclass(frozen=True)
class AggregateStats:
    suppression: SuppressionEstimate
    per_outcome: dict
    convergence_fractions: dict
    lost_dominance_fraction: float
    exhausted_fraction: float
    herald_failure_frequency: float
    ever_failed_fraction: float
    mean_restarts: float
    overhead: float
    trajectories: int

    def to_dict(self) -> dict:
        return {
            "suppression": self.suppression._asdict(),
            "per_outcome": {k: v._asdict() for k, v in self.per_outcome.items()},
            "convergence_fractions": {str(k): v for k, v in self.convergence_fractions.items()},
            "lost_dominance_fraction": self.lost_dominance_fraction,
            "exhausted_fraction": self.exhausted_fraction,
            "herald_failure_frequency": self.herald_failure_frequency,
            "ever_failed_fraction": self.ever_failed_fraction,
            "mean_restarts": self.mean_restarts,
            "overhead": self.overhead,
            "trajectories": self.trajectories,
        }


def near_convergent_mask(rs: RecordSet, threshold: float) -> np.ndarray:
    """Rounds whose preceding state is near-convergent and whose dominant index is kept."""
    c = rs.columns
    T = len(rs)
    prev_wd = np.concatenate([np.full((T, 1), rs.initial_w_dominant), c["w_dominant"][:, :-1]], axis=1)
    prev_dom = np.concatenate([np.full((T, 1), rs.initial_dominant), c["dominant"][:, :-1]], axis=1)
    sr = c["step_ratio"]
    with np.errstate(invalid="ignore"):
        ok = np.isfinite(sr) & (sr > 0)
    return ok & (prev_wd >= threshold) & (c["dominant"] == prev_dom)


def geometric_mean_ci(log_r: np.ndarray, mask: np.ndarray, seed: int = 0, n_boot: int = BOOTSTRAP):
    """Pooled geometric mean of masked per-round ratios; bootstrap CI over trajectories."""
    sums = np.where(mask, log_r, 0.0).sum(axis=1)
    counts = mask.sum(axis=1)
    total = int(counts.sum())
    if total == 0:
        raise ValueError("no rounds pass the near-convergent filter")
    gm = float(np.exp(sums.sum() / total))
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2**31,)))
    T = len(sums)
    boots = np.empty(n_boot)
    step = max(1, min(n_boot, 2_000_000 // max(T, 1)))
    for b0 in range(0, n_boot, step):
        b1 = min(n_boot, b0 + step)
        idx = rng.integers(0, T, size=(b1 - b0, T))
        c = counts[idx].sum(axis=1)
        boots[b0:b1] = np.exp(sums[idx].sum(axis=1) / np.maximum(c, 1))
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return SuppressionEstimate(gm, float(lo), float(hi), total)


def estimate_suppression(
    rs: RecordSet,
    threshold: float = 0.99,
    tol: float = 1e-3,
    seed: int = 0,
    n_boot: int = BOOTSTRAP,
) -> AggregateStats:
    if len(rs) == 0:
        raise ValueError("empty record set")
    c = rs.columns
    mask = near_convergent_mask(rs, threshold)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.log(c["step_ratio"])
    overall = geometric_mean_ci(log_r, mask, seed, n_boot)
    per = {}
    for j, label in enumerate(rs.labels):
        m = mask & (c["outcome"] == j)
        if m.any():
            per[label] = geometric_mean_ci(log_r, m, seed + j + 1, n_boot)
    classes = classify_all(rs, tol)
    T = len(rs)
    conv: dict = {}
    lost = exhausted = 0
    for cl in classes:
        if cl.kind == "converged":
            conv[cl.index] = conv.get(cl.index, 0) + 1
        elif cl.kind == "lost_dominance":
            lost += 1
        else:
            exhausted += 1
    fail = ~c["herald"]
    ever = float(np.mean(fail.any(axis=1)))
    return AggregateStats(
        overall,
        per,
        {k: v / T for k, v in sorted(conv.items())},
        lost / T,
        exhausted / T,
        float(fail.mean()),
        ever,
        float(c["restart"].sum(axis=1).mean()),
        1.0 / (1.0 - ever) if ever < 1.0 else np.inf,
        T,
    )


def trace(rs: RecordSet, column: str = "w_target", transform=None) -> Trace:
    """Per-iteration mean, standard deviation and standard error of a column."""
    x = np.asarray(rs.columns[column], dtype=float)
    if transform is not None:
        x = transform(x)
    n = x.shape[0]
    std = x.std(axis=0, ddof=1) if n > 1 else np.zeros(x.shape[1])
    return Trace(x.mean(axis=0), std, std / np.sqrt(n))


def last_decile_herald_success(rs: RecordSet, tol: float = 1e-3) -> float:
    """Herald success frequency over the final 10% of rounds in converged trajectories."""
    classes = classify_all(rs, tol)
    keep = np.array([cl.kind == "converged" for cl in classes])
    if not keep.any():
        raise ValueError("no converged trajectories")
    K = rs.iterations
    start = K - max(1, K // 10)
    return float(rs.columns["herald"][keep, start:].mean())
