"""Closed-form moments, suppression constants and overhead model, plus a Monte Carlo integral oracle.

Two moment conventions appear.  ``one_plus_cos`` uses amplitude factors
``1 + cos(phi)``; ``cos_squared`` uses ``cos^2(phi/2)``.  Because
``log(1 + cos phi) = log 2 + log cos^2(phi/2)`` the means differ by ``log 2`` per
trigonometric factor (``log 4`` for a two-device product).  Suppression ratios
are the same in both.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

import numpy as np
from scipy.special import digamma, gammaln

LOG2 = np.log(2.0)
LOG4 = np.log(4.0)
EULER_GAMMA = float(np.euler_gamma)
CONVENTIONS = ("one_plus_cos", "cos_squared")


def _check_weight(x, name="population"):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def harmonic(z):
    """Generalized harmonic number H(z) = digamma(z + 1) + Euler's gamma."""
    return digamma(np.asarray(z, dtype=float) + 1.0) + EULER_GAMMA


# --- single device ---------------------------------------------------------

def mu_single(c_sq: float) -> float:
    """E[log(1 + cos phi_j)] under the outcome-biased density, ``|c_j|^2 - log 2``."""
    _check_weight(c_sq)
    return c_sq - LOG2


def var_single(c_sq: float) -> float:
    _check_weight(c_sq)
    return np.pi**2 / 3.0 - c_sq * (2.0 + c_sq)


# --- two devices, Bell V ---------------------------------------------------

BELL_KINDS = ("dd_01", "dj_01", "diag_00_11")


def mu_two_bell(kind: str, c_dj_sq: float = 0.0, c_jd_sq: float = 0.0, sum_diag: float = 1.0) -> float:
    """Mean log amplitude factor for the Bell-basis variant.

    ``dd_01``: identical eigenstates after a "01" outcome (factor 2, no integral).
    ``dj_01``: distinct eigenstates after "01".
    ``diag_00_11``: configuration (d, j) after "00" or "11"; ``c_dj_sq`` and
    ``c_jd_sq`` are its two populations (pass the same value once with the
    other zero for a diagonal configuration).
    """
    for x in (c_dj_sq, c_jd_sq, sum_diag):
        _check_weight(x)
    if kind == "dd_01":
        return LOG2
    if kind == "dj_01":
        return -LOG2 + (c_dj_sq + c_jd_sq) / (1.0 + sum_diag)
    if kind == "diag_00_11":
        return c_dj_sq + c_jd_sq - LOG2
    raise ValueError(f"unknown kind {kind!r}; expected one of {BELL_KINDS}")


# --- two devices, controlled swap -----------------------------------------

SWAP_KINDS = ("dd_000", "ds_000", "any_001")


def _joint(populations) -> np.ndarray:
    c = np.asarray(populations, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("joint populations must be a square array")
    if np.any(c < 0) or abs(c.sum() - 1.0) > 1e-9:
        raise ValueError("joint populations must be nonnegative and sum to 1")
    return c


def mu_three_swap_general(outcome: str, i: int, j: int, populations) -> float:
    """Mean log factor of configuration (i, j) for outcome "000"/"011" or "001"/"010"."""
    c = _joint(populations)
    if outcome in ("000", "011"):
        norm = 1.0 + 0.5 * np.trace(c)

        def half(a):
            cross = c[a, :].sum() + c[:, a].sum() - 2.0 * c[a, a]
            return -LOG2 + (1.75 * c[a, a] + cross) / norm

        return float(half(i) + half(j))
    if outcome in ("001", "010"):
        return float(c[i, j] + (c[j, i] if i != j else 0.0) - LOG2)
    raise ValueError(f"no closed form for outcome {outcome!r}")


def mu_three_swap(kind: str, populations=None) -> float:
    """Swap-variant means; without populations the near-convergent limit is used."""
    if kind not in SWAP_KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {SWAP_KINDS}")
    if populations is None:
        populations = np.array([[1.0, 0.0], [0.0, 0.0]])
    c = _joint(populations)
    if kind == "dd_000":
        return mu_three_swap_general("000", 0, 0, c)
    if kind == "ds_000":
        return mu_three_swap_general("000", 0, 1, c)
    return mu_three_swap_general("001", 0, 1, c)


# --- p devices, symmetric projection ---------------------------------------

def symmetric_outcome_probability(p) -> float:
    """F(p) = Gamma(p + 1/2) / (sqrt(pi) Gamma(p + 1)), the all-zeros probability."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 1):
        raise ValueError("device count must be >= 1")
    out = np.exp(gammaln(p + 0.5) - gammaln(p + 1.0)) / np.sqrt(np.pi)
    return float(out) if out.ndim == 0 else out


def mu_multi(p, kind: str) -> float:
    """Near-convergent means of the all-zeros factor (cos_squared convention)."""
    if np.any(np.asarray(p) < 1):
        raise ValueError("device count must be >= 1")
    delta = harmonic(np.asarray(p) - 0.5) - harmonic(p)
    if kind == "dominant":
        out = p * delta
    elif kind == "subdominant":
        out = -LOG4 + (np.asarray(p) - 1) * delta
    else:
        raise ValueError(f"kind must be 'dominant' or 'subdominant', got {kind!r}")
    return float(out) if np.ndim(out) == 0 else out


def multi_suppression(p) -> float:
    """exp(mu_sub - mu_dom) = exp(-log 4 - [H(p - 1/2) - H(p)])."""
    return np.exp(mu_multi(p, "subdominant") - mu_multi(p, "dominant"))


def convert_convention(mu: float, factors: int, source: str, target: str) -> float:
    """Shift a mean between conventions; ``factors`` counts trig factors in the product."""
    for c in (source, target):
        if c not in CONVENTIONS:
            raise ValueError(f"unknown convention {c!r}")
    if source == target:
        return mu
    shift = factors * LOG2
    return mu - shift if source == "one_plus_cos" else mu + shift


# --- suppression constants -------------------------------------------------

@dataclass(frozen=True)
class SuppressionReport:
    variant: str
    per_outcome: Mapping[str, float]
    weights: Mapping[str, float]
    combined: float = field(init=False)

    def __post_init__(self):
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"outcome weights sum to {total}, expected 1")
        logs = sum(w * np.log(self.per_outcome[b]) for b, w in self.weights.items())
        object.__setattr__(self, "combined", float(np.exp(logs)))


def suppression_report(variant: str, devices: int | None = None) -> SuppressionReport:
    """Near-convergent per-outcome suppressions and their probability weights."""
    e1 = np.exp(mu_single(0.0) - mu_single(1.0))
    if variant == "single":
        return SuppressionReport("single", {"0": e1, "1": e1}, {"0": 0.5, "1": 0.5})
    if variant == "two_bell":
        diag = np.exp(mu_two_bell("diag_00_11", 0.0, 0.0) - mu_two_bell("diag_00_11", 1.0, 0.0))
        s01 = np.exp(mu_two_bell("dj_01", 0.0, 0.0, 1.0) - mu_two_bell("dd_01"))
        return SuppressionReport(
            "two_bell",
            {"00": diag, "11": diag, "01": s01},
            {"00": 0.25, "11": 0.25, "01": 0.5},
        )
    if variant == "two_swap":
        s000 = np.exp(mu_three_swap("ds_000") - mu_three_swap("dd_000"))
        c = np.array([[1.0, 0.0], [0.0, 0.0]])
        s001 = np.exp(mu_three_swap_general("001", 0, 1, c) - mu_three_swap_general("001", 0, 0, c))
        return SuppressionReport(
            "two_swap",
            {"000": s000, "011": s000, "001": s001, "010": s001},
            {"000": 0.375, "011": 0.375, "001": 0.125, "010": 0.125},
        )
    if variant == "symmetric":
        p = devices or 2
        s = multi_suppression(p)
        zeros, ones = "0" * (p + 1), "0" + "1" * p
        # only the all-zeros and all-ones strings have closed forms
        return SuppressionReport(f"symmetric_{p}", {zeros: s, ones: s}, {zeros: 0.5, ones: 0.5})
    raise ValueError(f"no suppression constant for variant {variant!r}")


def suppression_constant(variant: str, devices: int | None = None) -> float:
    return suppression_report(variant, devices).combined


# --- overhead model --------------------------------------------------------

def diagonal_norm_after(x0: float, k) -> np.ndarray:
    """Expected diagonal norm after k counted "01" rounds, 2^k x0 / (1 + x0 (2^k - 1))."""
    _check_weight(x0, "x0")
    pw = 2.0 ** np.asarray(k, dtype=float)
    return pw * x0 / (1.0 + x0 * (pw - 1.0))


def herald_success_through(x0: float, rounds: int) -> float:
    """Probability of no antisymmetric outcome over ``rounds`` counted rounds."""
    _check_weight(x0, "x0")
    return (1.0 + (2.0 ** (rounds + 1) - 1.0) * x0) / (2.0**rounds * (x0 + 1.0))


def asymptotic_failure_probability(x0: float) -> float:
    """Probability of ever seeing the antisymmetric herald, (1 - x0) / (1 + x0)."""
    _check_weight(x0, "x0")
    return (1.0 - x0) / (1.0 + x0)


def restart_cost_factor(x0: float) -> float:
    """Expected number of attempts until a run never fails, (1 + x0) / (2 x0)."""
    _check_weight(x0, "x0")
    if x0 == 0.0:
        return np.inf
    return (1.0 + x0) / (2.0 * x0)


def overhead_model(x0: float, k: int | None = None) -> float:
    """Failure probability after ``k`` counted rounds, or asymptotically when ``k`` is None."""
    if k is None:
        return asymptotic_failure_probability(x0)
    return 1.0 - herald_success_through(x0, k)


# --- Monte Carlo oracle ----------------------------------------------------

class MomentEstimate(NamedTuple):
    mean: float
    variance: float
    standard_error: float
    convention: str = "one_plus_cos"


STRATA = 64
CHUNK = 1 << 16


def _lhs_uniform(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Latin-hypercube-style stratified uniforms on [0, 1)^dim, 64 strata per axis."""
    u = rng.random((n, dim))
    strata = np.arange(n) % STRATA
    cols = [rng.permutation(strata) for _ in range(dim)]
    return (np.stack(cols, axis=1) + u) / STRATA


def mc_integral_oracle(
    integrand: Callable[[np.ndarray], np.ndarray],
    bias: Callable[[np.ndarray], np.ndarray] | None,
    dim: int,
    samples: int = 10**6,
    seed: int = 0,
    stratified: bool = True,
    convention: str = "one_plus_cos",
) -> MomentEstimate:
    """Estimate E[f(phi)] for phi on [0, 2 pi)^dim with density proportional to ``bias``.

    Self-normalized importance sampling from the uniform proposal.  The reported
    standard error is the delta-method error of the ratio estimator, which is
    conservative under stratification.  Each chunk of 2**16 samples draws from
    its own stream, spawned from ``seed``.
    """
    if samples < 1000:
        raise ValueError("at least 1000 samples are required")
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    n_chunks = -(-samples // CHUNK)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    sw = swf = sww = swwf = swwff = 0.0
    sf = sff = 0.0
    for c, ss in enumerate(streams):
        n = min(CHUNK, samples - c * CHUNK)
        rng = np.random.Generator(np.random.PCG64(ss))
        u = _lhs_uniform(rng, n, dim) if stratified else rng.random((n, dim))
        phi = 2.0 * np.pi * u
        f = np.asarray(integrand(phi), dtype=float)
        w = np.ones(n) if bias is None else np.asarray(bias(phi), dtype=float)
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("bias density must be finite and nonnegative")
        f = np.where(w > 0, f, 0.0)
        sw += w.sum()
        swf += (w * f).sum()
        sww += (w * w).sum()
        swwf += (w * w * f).sum()
        swwff += (w * w * f * f).sum()
        sf += (w * f * f).sum()
    if sw <= 0:
        raise ValueError("bias density is not normalizable")
    mean = swf / sw
    variance = sf / sw - mean**2
    # delta-method variance of sum(w f) / sum(w)
    resid = swwff - 2 * mean * swwf + mean**2 * sww
    se = np.sqrt(max(resid, 0.0)) / sw
    return MomentEstimate(float(mean), float(max(variance, 0.0)), float(se), convention)


# --- catalogue of closed forms with their integrals ------------------------

class CatalogueEntry(NamedTuple):
    quantity: str
    closed_form: float
    dim: int
    integrand: Callable
    bias: Callable | None


def _one_plus_cos(x):
    return 1.0 + np.cos(x)


def _log_opc(x):
    return np.log(1.0 + np.cos(x))


def _log_omc(x):
    return np.log(1.0 - np.cos(x))


def _cos2(x):
    return np.cos(x / 2.0) ** 2


def _pair_bias(c, kernel):
    c = np.asarray(c, dtype=float)

    def bias(phi):
        out = 0.0
        for (l, q), w in np.ndenumerate(c):
            if w:
                out = out + w * kernel(phi[:, l], phi[:, q])
        return out

    return bias


def moment_catalogue() -> list[CatalogueEntry]:
    """Every closed form paired with the integral it claims to evaluate."""
    rows = []
    for c in (0.0, 0.5, 1.0):
        bias = _pair_bias(np.diag([c, 1 - c]), lambda a, b: _one_plus_cos(a))
        mu = mu_single(c)
        rows.append(CatalogueEntry(f"mu_single[{c}]", mu, 2, lambda p: _log_opc(p[:, 0]), bias))
        rows.append(
            CatalogueEntry(
                f"var_single[{c}]", var_single(c), 2,
                lambda p, mu=mu: (_log_opc(p[:, 0]) - mu) ** 2, bias,
            )
        )

    minus = lambda a, b: _one_plus_cos(a - b)  # noqa: E731
    plus = lambda a, b: _one_plus_cos(a + b)  # noqa: E731
    rows.append(
        CatalogueEntry("mu_two_bell[dd_01]", mu_two_bell("dd_01"), 1,
                       lambda p: _log_opc(p[:, 0] - p[:, 0]), None)
    )
    for cdd, cdj, cjd in ((0.9, 0.1, 0.0), (0.6, 0.25, 0.15), (0.0, 0.0, 0.0)):
        cjj = 1.0 - cdd - cdj - cjd
        c = np.array([[cdd, cdj], [cjd, cjj]])
        rows.append(
            CatalogueEntry(
                f"mu_two_bell[dj_01;{cdj},{cjd},{cdd + cjj:g}]",
                mu_two_bell("dj_01", cdj, cjd, cdd + cjj), 2,
                lambda p: _log_opc(p[:, 0] - p[:, 1]), _pair_bias(c, minus),
            )
        )
    for c in (np.array([[0.7, 0.2], [0.1, 0.0]]), np.array([[1.0, 0.0], [0.0, 0.0]])):
        rows.append(
            CatalogueEntry(
                f"mu_two_bell[diag_00_11;{c[0, 1]},{c[1, 0]}]",
                mu_two_bell("diag_00_11", c[0, 1], c[1, 0]), 2,
                lambda p: _log_opc(p[:, 0] + p[:, 1]), _pair_bias(c, plus),
            )
        )
        rows.append(
            CatalogueEntry(
                f"mu_two_bell[diag_00_11;dd;{c[0, 0]}]",
                mu_two_bell("diag_00_11", c[0, 0], 0.0), 2,
                lambda p: _log_opc(2 * p[:, 0]), _pair_bias(c, plus),
            )
        )

    prod = lambda a, b: _one_plus_cos(a) * _one_plus_cos(b)  # noqa: E731
    swap_pops = {
        "near": np.array([[1.0, 0.0], [0.0, 0.0]]),
        "mixed": np.array([[0.5, 0.2], [0.1, 0.2]]),
    }
    for label, c in swap_pops.items():
        for i, j in ((0, 0), (0, 1), (1, 1)):
            rows.append(
                CatalogueEntry(
                    f"mu_three_swap[000;{i}{j};{label}]",
                    mu_three_swap_general("000", i, j, c), 2,
                    lambda p, i=i, j=j: _log_opc(p[:, i]) + _log_opc(p[:, j]),
                    _pair_bias(c, prod),
                )
            )
        omc = lambda a, b: 1.0 - np.cos(a + b)  # noqa: E731
        for i, j in ((0, 1), (0, 0)):
            rows.append(
                CatalogueEntry(
                    f"mu_three_swap[001;{i}{j};{label}]",
                    mu_three_swap_general("001", i, j, c), 2,
                    lambda p, i=i, j=j: _log_omc(p[:, i] + p[:, j]), _pair_bias(c, omc),
                )
            )
    rows.append(
        CatalogueEntry("mu_three_swap[001;zero]", -LOG2, 2,
                       lambda p: _log_omc(p[:, 0] + p[:, 1]), None)
    )

    for p in range(1, 7):
        rows.append(
            CatalogueEntry(f"F[{p}]", symmetric_outcome_probability(p), 1,
                           lambda x, p=p: _cos2(x[:, 0]) ** p, None)
        )
    for p in range(2, 7):
        rows.append(
            CatalogueEntry(
                f"mu_multi[dominant;{p}]", mu_multi(p, "dominant"), 1,
                lambda x, p=p: p * np.log(_cos2(x[:, 0])),
                lambda x, p=p: _cos2(x[:, 0]) ** p,
            )
        )
        rows.append(
            CatalogueEntry(
                f"mu_multi[subdominant;{p}]", mu_multi(p, "subdominant"), 2,
                lambda x, p=p: (p - 1) * np.log(_cos2(x[:, 0])) + np.log(_cos2(x[:, 1])),
                lambda x, p=p: _cos2(x[:, 0]) ** p,
            )
        )
    return rows


def validate_moments(samples: int = 10**6, seed: int = 0, n_se: float = 3.0):
    """Yield (quantity, closed_form, mc_mean, se, passed) for every catalogue row."""
    for k, row in enumerate(moment_catalogue()):
        est = mc_integral_oracle(row.integrand, row.bias, row.dim, samples, seed=(seed, k))
        if est.standard_error == 0.0:
            ok = abs(est.mean - row.closed_form) <= 1e-12
        else:
            ok = abs(est.mean - row.closed_form) <= n_se * est.standard_error
        yield row.quantity, row.closed_form, est.mean, est.standard_error, ok
