import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from eigencast import analytics as an

LOG2 = np.log(2.0)
E = np.e


def test_mu_single_examples():
    assert an.mu_single(0.0) == pytest.approx(-0.6931, abs=1e-4)
    assert an.mu_single(1.0) == pytest.approx(0.3069, abs=1e-4)
    assert an.mu_single(0.5) == pytest.approx(-0.1931, abs=1e-4)
    with pytest.raises(ValueError):
        an.mu_single(1.2)
    with pytest.raises(ValueError):
        an.mu_single(-0.1)


def test_var_single_examples():
    assert an.var_single(0.0) == pytest.approx(3.2899, abs=1e-4)
    assert an.var_single(1.0) == pytest.approx(0.2899, abs=1e-4)
    assert an.var_single(0.5) == pytest.approx(np.pi**2 / 3 - 1.25)


def test_mu_single_by_quadrature():
    # E[log(1+cos x)] with density (1 + c cos x) / 2 pi, independent of the MC oracle
    for c in (0.0, 0.3, 1.0):
        f = lambda x: np.log(1 + np.cos(x)) * (1 + c * np.cos(x)) / (2 * np.pi)  # noqa: E731
        val, _ = integrate.quad(f, 0, 2 * np.pi, points=[np.pi], limit=200)
        assert val == pytest.approx(an.mu_single(c), abs=1e-7)


def test_two_bell_examples():
    assert an.mu_two_bell("dd_01") == pytest.approx(LOG2)
    assert an.mu_two_bell("dj_01", 0.0, 0.0, 1.0) == pytest.approx(-LOG2)
    assert an.mu_two_bell("dj_01", 0.1, 0.0, 0.9) == pytest.approx(-LOG2 + 0.1 / 1.9)
    with pytest.raises(ValueError):
        an.mu_two_bell("xx")


def test_three_swap_examples():
    assert an.mu_three_swap("dd_000") == pytest.approx(-2 * LOG2 + 7 / 3)
    assert an.mu_three_swap("ds_000") == pytest.approx(-2 * LOG2 + 7 / 6)
    zero = np.array([[0.0, 0.0], [0.0, 1.0]])
    assert an.mu_three_swap("any_001", zero) == pytest.approx(-LOG2)
    with pytest.raises(ValueError):
        an.mu_three_swap("dd_000", np.array([[0.5, 0.0], [0.0, 0.2]]))


def test_suppression_constants():
    assert an.suppression_constant("single") == pytest.approx(1 / E)
    assert an.suppression_constant("two_bell") == pytest.approx(1 / (2 * np.sqrt(E)))
    assert an.suppression_constant("two_swap") == pytest.approx(np.exp(-9 / 8))
    rep = an.suppression_report("two_bell")
    assert rep.per_outcome["01"] == pytest.approx(0.25)
    assert an.suppression_report("two_swap").per_outcome["000"] == pytest.approx(np.exp(-7 / 6))
    with pytest.raises(ValueError):
        an.suppression_constant("teleport")


def test_bell_combined_identity():
    assert an.suppression_constant("two_bell") == pytest.approx(
        an.suppression_constant("single") ** 0.5 * 0.25**0.5, rel=1e-15
    )


def test_report_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        an.SuppressionReport("x", {"a": 0.5}, {"a": 0.9})


def test_symmetric_outcome_probability():
    assert an.symmetric_outcome_probability(1) == pytest.approx(0.5)
    assert an.symmetric_outcome_probability(2) == pytest.approx(3 / 8)
    f100 = an.symmetric_outcome_probability(100)
    assert 2 * f100 == pytest.approx(2 / np.sqrt(100 * np.pi), rel=0.01)
    ps = np.arange(1, 60)
    f = an.symmetric_outcome_probability(ps)
    assert np.all(f > 0) and np.all(np.diff(f) < 0)


def test_harmonic_numbers():
    assert an.harmonic(1) == pytest.approx(1.0)
    assert an.harmonic(3) == pytest.approx(1 + 1 / 2 + 1 / 3)
    assert an.harmonic(0.5) == pytest.approx(2 - 2 * LOG2, abs=1e-12)
    assert an.harmonic(1.5) == pytest.approx(2 - 2 * LOG2 + 2 / 3, abs=1e-12)


def test_mu_multi_examples():
    assert an.multi_suppression(2) == pytest.approx(np.exp(-7 / 6), rel=1e-12)
    assert abs(an.multi_suppression(10**4) - 0.25) < 1e-4
    assert an.multi_suppression(1) == pytest.approx(1 / E, rel=1e-12)
    with pytest.raises(ValueError):
        an.mu_multi(2, "other")


def test_convention_shift_on_p2_pair():
    # dd_000 carries two trig factors
    a = an.mu_three_swap("dd_000")
    b = 2 * (an.harmonic(1.5) - an.harmonic(2))
    assert an.convert_convention(a, 2, "one_plus_cos", "cos_squared") == pytest.approx(b, abs=1e-12)
    assert an.convert_convention(b, 2, "cos_squared", "one_plus_cos") == pytest.approx(a, abs=1e-12)
    with pytest.raises(ValueError):
        an.convert_convention(a, 1, "one_plus_cos", "sine")


def test_overhead_examples():
    assert an.overhead_model(1.0) == 0.0
    assert an.diagonal_norm_after(0.5, 1) == pytest.approx(2 / 3)
    assert an.overhead_model(1 / 3) == pytest.approx(0.5)
    assert an.overhead_model(0.4, 0) == pytest.approx(0.0)
    # finite-k failure probability rises toward the asymptote
    ks = [an.overhead_model(0.4, k) for k in range(40)]
    assert np.all(np.diff(ks) >= 0)
    assert ks[-1] == pytest.approx(an.overhead_model(0.4), abs=1e-9)
    assert an.restart_cost_factor(0.5) == pytest.approx(1.5)


def test_mc_oracle_examples():
    est = an.mc_integral_oracle(lambda p: np.log(1 + np.cos(p[:, 0])), None, 1, 10**6, seed=1)
    assert abs(est.mean + LOG2) < 3 * est.standard_error
    est = an.mc_integral_oracle(
        lambda p: np.log(np.cos(p[:, 0] / 2) ** 2), lambda p: np.cos(p[:, 0] / 2) ** 4, 1, 10**6, seed=2
    )
    assert abs(est.mean - (7 / 6 - np.log(4))) < 3 * est.standard_error
    est = an.mc_integral_oracle(lambda p: np.log(1 - np.cos(p[:, 0] + p[:, 1])), None, 2, 10**6, seed=3)
    assert abs(est.mean + LOG2) < 3 * est.standard_error


def test_mc_oracle_errors_and_determinism():
    with pytest.raises(ValueError):
        an.mc_integral_oracle(lambda p: p[:, 0], None, 1, 999)
    with pytest.raises(ValueError):
        an.mc_integral_oracle(lambda p: p[:, 0], lambda p: 0 * p[:, 0], 1, 5000)
    with pytest.raises(ValueError):
        an.mc_integral_oracle(lambda p: p[:, 0], lambda p: -1 + 0 * p[:, 0], 1, 5000)
    a = an.mc_integral_oracle(lambda p: np.cos(p[:, 0]) ** 2, None, 1, 10**5, seed=9)
    b = an.mc_integral_oracle(lambda p: np.cos(p[:, 0]) ** 2, None, 1, 10**5, seed=9)
    assert a == b


def test_mc_oracle_plain_mode():
    est = an.mc_integral_oracle(lambda p: np.cos(p[:, 0]) ** 2, None, 1, 10**5, seed=4, stratified=False)
    assert abs(est.mean - 0.5) < 4 * est.standard_error


def test_catalogue_has_every_family():
    names = [r.quantity for r in an.moment_catalogue()]
    for prefix in ("mu_single", "var_single", "mu_two_bell", "mu_three_swap", "F[", "mu_multi[dominant",
                   "mu_multi[subdominant"):
        assert any(n.startswith(prefix) for n in names), prefix
    assert sum(n.startswith("F[") for n in names) == 6


def test_catalogue_small_sample():
    rows = list(an.validate_moments(samples=50_000, seed=1, n_se=4.0))
    failed = [r for r in rows if not r[4]]
    assert not failed


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1))
def test_var_nonnegative(c):
    assert an.var_single(c) >= 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1))
def test_overhead_bounds(x0):
    f = an.overhead_model(x0)
    assert 0 <= f <= 1
    assert an.diagonal_norm_after(x0, 5) >= x0 - 1e-15
