import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reset_kernels.qspecial import (
    PoleError,
    QDomainError,
    QValue,
    gamma_ratio,
    log_q_pochhammer_inf,
    mittag_leffler,
    q_binomial,
    q_bracket,
    q_factorial,
    q_gamma,
    q_pochhammer,
)

qs = st.floats(0.05, 0.95)


def direct_product(a, q, n):
    return math.prod(1.0 - a * q**j for j in range(n))


@pytest.mark.parametrize("q", [0.0, 1.0, -0.2, 1.5])
def test_q_outside_unit_interval_rejected(q):
    with pytest.raises(QDomainError):
        QValue(q)
    with pytest.raises(QDomainError):
        q_pochhammer(0.5, q, 3)


@pytest.mark.parametrize("a", [0.3, -2.0, 7.0])
def test_empty_product_is_one(a):
    assert q_pochhammer(a, 0.5, 0) == 1.0


def test_two_factor_product():
    assert q_pochhammer(0.5, 0.5, 2) == pytest.approx(0.375, rel=1e-15)


def test_infinite_product_matches_long_partial_product():
    assert q_pochhammer(0.5, 0.5) == pytest.approx(direct_product(0.5, 0.5, 200), rel=1e-15)


@pytest.mark.parametrize("a,q", [(0.5, 0.5), (0.9, 0.95), (0.1, 0.2), (-3.0, 0.7)])
def test_infinite_product_against_mpmath(a, q):
    ref = float(mpmath.qp(a, q))
    assert q_pochhammer(a, q) == pytest.approx(ref, rel=1e-13)


def test_log_infinite_product():
    assert math.exp(log_q_pochhammer_inf(0.5, 0.5)) == pytest.approx(q_pochhammer(0.5, 0.5), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-2.0, 0.99), q=qs, n=st.integers(0, 40))
def test_pochhammer_step(a, q, n):
    lhs = q_pochhammer(a, q, n + 1)
    rhs = q_pochhammer(a, q, n) * (1.0 - a * q**n)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("q", [0.2, 0.5, 0.9])
def test_q_gamma_at_one_and_two(q):
    assert q_gamma(q, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert q_gamma(q, 2.0) == pytest.approx(1.0, rel=1e-14)


def test_q_gamma_against_truncated_definition():
    q, x = 0.3, 3.7
    ref = (1 - q) ** (1 - x) * direct_product(q, q, 500) / direct_product(q**x, q, 500)
    assert q_gamma(q, x) == pytest.approx(ref, rel=1e-14)


def test_q_gamma_against_mpmath():
    for q, x in [(0.5, 0.3), (0.8, -1.5), (0.2, 6.25)]:
        assert q_gamma(q, x) == pytest.approx(float(mpmath.qgamma(x, q)), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -4.0])
def test_q_gamma_poles(x):
    with pytest.raises(PoleError):
        q_gamma(0.5, x)


@settings(max_examples=60, deadline=None)
@given(q=qs, x=st.floats(-6.0, 12.0).filter(lambda v: min(abs(v - k) for k in range(-7, 1)) > 1e-3))
def test_q_gamma_recurrence(q, x):
    assert q_gamma(q, x + 1.0) == pytest.approx(q_bracket(x, q) * q_gamma(q, x), rel=1e-12)


def test_gamma_ratio_identity_case():
    assert gamma_ratio(0.0, 0.3) == pytest.approx(1.0, rel=1e-15)


def test_gamma_ratio_limit_at_minus_one():
    m = 0.5
    assert gamma_ratio(-1.0, m) == pytest.approx(math.log(1 / m) / (1 - m), rel=1e-14)


@pytest.mark.parametrize("g", [-1.0, -2.0, -3.0])
def test_gamma_ratio_continuous_at_negative_integers(g):
    v = gamma_ratio(g, 0.5)
    for eps in (1e-8, -1e-8):
        assert abs(gamma_ratio(g + eps, 0.5) - v) <= 1e-5
    assert gamma_ratio(-2.0 + 1e-9, 0.5) == pytest.approx(gamma_ratio(-2.0, 0.5), rel=1e-6)


def test_gamma_ratio_against_definition():
    for g, m in [(1.5, 0.4), (-0.5, 0.7), (-2.5, 0.2)]:
        ref = math.gamma(g + 1) / q_gamma(m, g + 1)
        assert gamma_ratio(g, m) == pytest.approx(ref, rel=1e-12)


def test_q_binomial_trivial_and_factorial():
    q = 0.5
    assert q_binomial(5, 0, q) == pytest.approx(1.0, rel=1e-14)
    ref = q_factorial(4, q) / q_factorial(2, q) ** 2
    assert q_binomial(4, 2, q) == pytest.approx(ref, rel=1e-13)


def test_q_factorial_is_bracket_product():
    q = 0.3
    assert q_factorial(5, q) == pytest.approx(math.prod(q_bracket(k, q) for k in range(1, 6)), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(q=qs, x=st.floats(0.01, 0.99), n=st.integers(0, 8))
def test_q_binomial_theorem(q, x, n):
    total = math.fsum(q ** (k * (k - 1) / 2) * q_binomial(n, k, q) * (-x) ** k for k in range(n + 1))
    assert total == pytest.approx(q_pochhammer(x, q, n), abs=1e-12)


def test_q_binomial_theorem_for_moment_product():
    # (m^{1+g-k}; m)_n expanded as in the all-moments identity
    m, g, k, n = 0.5, 0.7, 2, 3
    x = m ** (1 + g - k)
    total = math.fsum(m ** (j * (j - 1) / 2) * q_binomial(n, j, m) * (-x) ** j for j in range(n + 1))
    assert total == pytest.approx(q_pochhammer(x, m, n), rel=1e-12)


@pytest.mark.parametrize("t", [0.0, 0.5, 3.0, 20.0])
def test_mittag_leffler_exponential(t):
    assert mittag_leffler(1.0, 1.0, t) == pytest.approx(math.exp(t), rel=1e-14)


def test_mittag_leffler_shifted():
    assert mittag_leffler(1.0, 2.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-14)


def test_mittag_leffler_large_argument_asymptote():
    t, beta = 10.0, 0.5
    assert t ** (beta - 1) * math.exp(-t) * mittag_leffler(1.0, beta, t) == pytest.approx(1.0, rel=0.02)


def test_mittag_leffler_against_mpmath():
    a, b, t = 0.7, 1.3, 2.5
    ref = mpmath.nsum(lambda n: mpmath.mpf(t) ** n / mpmath.gamma(a * n + b), [0, mpmath.inf])
    assert mittag_leffler(a, b, t) == pytest.approx(float(ref), rel=1e-13)
