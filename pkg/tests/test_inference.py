import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from depbound.inference import ci_from_se, normal_cdf, normal_quantile, wald_ci


def test_quantile_examples():
    assert normal_quantile(0.5) == 0
    assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    assert normal_quantile(0.025) == pytest.approx(-normal_quantile(0.975), abs=1e-12)


def test_quantile_against_scipy():
    from scipy.stats import norm
    for k in range(1, 2000):
        p = k / 2000
        assert abs(normal_quantile(p) - norm.ppf(p)) < 1e-9
    for p in (1e-300, 1e-12, 1 - 1e-12):
        assert abs(normal_quantile(p) - norm.ppf(p)) < 1e-9 * max(1, abs(norm.ppf(p)))


@pytest.mark.parametrize("p", [0, 1, -0.1, 1.5, float("nan")])
def test_quantile_domain(p):
    with pytest.raises(ValueError):
        normal_quantile(p)


@given(st.floats(1e-10, 1 - 1e-10))
def test_quantile_inverts_cdf(p):
    assert normal_cdf(normal_quantile(p)) == pytest.approx(p, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("se, lo, hi", [(0.0147, 0.299, 0.357), (0.0602, 0.210, 0.446)])
def test_table_intervals(se, lo, hi):
    ci = wald_ci(0.328, se ** 2, 0.05)
    assert (round(ci.lower, 3), round(ci.upper, 3)) == (lo, hi)


def test_degenerate_interval():
    ci = wald_ci(1.5, 0.0)
    assert ci.lower == ci.upper == 1.5


def test_negative_variance_names_estimator():
    with pytest.raises(ValueError, match="v1"):
        wald_ci(0.0, -1e-3, estimator="v1")


@given(st.floats(-100, 100), st.floats(0, 100), st.floats(0, 100), st.floats(0.001, 0.5))
def test_width_monotone_and_symmetric(mean, va, vb, alpha):
    a, b = sorted((va, vb))
    ca, cb = wald_ci(mean, a, alpha), wald_ci(mean, b, alpha)
    assert ca.width <= cb.width
    assert ca.lower <= ca.upper
    assert (ca.upper - mean) == pytest.approx(mean - ca.lower, abs=1e-9)


def test_ci_from_se_matches_wald():
    assert math.isclose(ci_from_se(0.3, 0.1).half_width, wald_ci(0.3, 0.01).half_width, rel_tol=1e-15)
