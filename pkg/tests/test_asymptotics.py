import math

import numpy as np
import pytest

from reset_kernels import asymptotics as A
from reset_kernels import kernels as K
from reset_kernels import resetdensity as R
from reset_kernels.qspecial import q_pochhammer

M = 0.5


@pytest.mark.parametrize("r,regime", [(10.0, "uncovered"), (14.0, "bulk"), (25.0, "tail"), (20.0, "uncovered"), (5.0, "uncovered")])
def test_classify_examples(r, regime):
    rep = A.classify_regime(M, 10.0, r, delta=0.1)
    assert rep.regime == regime
    assert rep.L == r * r / 40.0


def test_classify_vector_point():
    assert A.classify_regime(M, 10.0, np.array([6.0, 8.0]), delta=0.05).L == pytest.approx(2.5)


@pytest.mark.parametrize("kw", [dict(delta=0.0), dict(delta=-1.0)])
def test_classify_rejects_delta(kw):
    with pytest.raises(ValueError):
        A.classify_regime(M, 10.0, 1.0, **kw)


@pytest.mark.parametrize("t", [50.0, 100.0])
def test_critical_point_seed(t):
    L = 0.6 * t
    cp = A.psi_and_critical_point(M, t, L)
    assert abs(cp.u0 - (math.sqrt(L / t) - 1 / (4 * t))) < 1e-3
    assert M < cp.u0 < 1
    assert cp.iterations <= 30
    assert cp.residual <= 1e-10 * t


def test_seed_error_shrinks_like_inverse_square():
    errs = []
    for t in (25.0, 50.0, 100.0):
        L = 0.6 * t
        errs.append(abs(A.psi_and_critical_point(M, t, L).u0 - (math.sqrt(L / t) - 1 / (4 * t))))
    assert errs[0] > errs[1] > errs[2]


def test_psi_second_leading_order():
    t = 100.0
    L = 0.6 * t
    cp = A.psi_and_critical_point(M, t, L)
    assert cp.psi2 / (-2 * t * math.sqrt(t / L)) == pytest.approx(1.0, rel=0.05)


def test_psi_second_against_difference():
    t, L, u = 30.0, 15.0, 0.7
    f = lambda v: A.psi(v, M, t, L, 1)  # noqa: E731

    def d1(h):
        return (f(u + h) - f(u - h)) / (2 * h)

    def d2(h):
        return (f(u + h) - 2 * f(u) + f(u - h)) / h**2

    # Richardson removes the h^2 term, which is large since the third derivative is O(t^3)
    h = 2e-3
    assert A.psi_prime(u, M, t, L, 1) == pytest.approx((4 * d1(h / 2) - d1(h)) / 3, abs=1e-7)
    assert A.psi_second(u, M, t, L, 1) == pytest.approx((4 * d2(h / 2) - d2(h)) / 3, rel=1e-6)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("t", [20.0, 60.0])
def test_psi_prime_negative_at_one(d, t):
    L = 0.5 * t
    # phi'(0)/phi(0) = 1/(1 - m^2)
    assert A.psi_prime(1.0, M, t, L, d) == pytest.approx(-d / 2 + L - t / (1 - M * M), rel=1e-12)
    assert A.psi_prime(1.0, M, t, L, d) < 0


@pytest.mark.parametrize("d", [1, 3])
def test_psi_concave_on_grid(d):
    t = 40.0
    for L in (d / 4 + 0.5, 10.0, 30.0):
        for u in np.linspace(M + 1e-3, 1 - 1e-3, 60):
            assert A.psi_second(u, M, t, L, d) < 0


def test_critical_point_regime_error():
    with pytest.raises(A.RegimeError):
        A.psi_and_critical_point(M, 50.0, 0.6 * 50.0**2)


def test_psi_prime_positive_at_m_in_bulk():
    for t in (20.0, 40.0, 80.0):
        L = (M * M + 0.1) * t
        assert A.psi_and_critical_point(M, t, L).psi_prime_m > 0


def test_bulk_example():
    t = 60.0
    rep = A.brownian_bulk_approx(M, t, math.sqrt(0.6) * 2 * t, exact=True)
    assert rep.regime == "bulk"
    assert abs(rep.relative_error) < 0.05
    assert rep.error_estimate == pytest.approx(1 / t)


def test_bulk_error_decreases():
    errs = [abs(A.brownian_bulk_approx(M, t, math.sqrt(0.6) * 2 * t, exact=True).relative_error) for t in (30.0, 60.0, 120.0)]
    assert errs[0] > errs[1] > errs[2]


def test_bulk_leading_is_rho_tail_form():
    t = 60.0
    y = math.sqrt(0.6) * 2 * t
    lead = A.brownian_bulk_approx(M, t, y, method="leading").approximation
    assert lead == pytest.approx(0.5 / q_pochhammer(M, M) * math.exp(-y), rel=1e-12)
    model = R.ResetModel(K.Brownian(1), m=M)
    assert lead / R.rho(model, y) == pytest.approx(1.0, rel=1e-6)


def test_bulk_leading_in_three_dimensions():
    t = 40.0
    y = np.array([0.0, 0.0, math.sqrt(0.5) * 2 * t])
    r = y[2]
    lead = A.brownian_bulk_approx(M, t, y, d=3, method="leading").approximation
    exact = 0.5 / q_pochhammer(M, M) * (2 * math.pi * r) ** -1 * math.exp(-r)
    assert lead == pytest.approx(exact, rel=1e-12)


def test_bulk_refuses_other_regimes():
    with pytest.raises(A.RegimeError):
        A.brownian_bulk_approx(M, 10.0, 25.0)
    with pytest.raises(ValueError):
        A.brownian_bulk_approx(M, 10.0, 14.0, method="nope")


def test_tail_example_constant():
    rep = A.brownian_tail_approx(M, 20.0, 60.0, exact=True)
    assert rep.regime == "tail"
    assert rep.error_estimate == pytest.approx(20.0 / 3600.0)
    # the constant in front of t/|y|^2 is bounded, about 15 here
    assert abs(rep.relative_error) <= 20 * rep.error_estimate


def test_tail_error_decreases_on_rays():
    errs = [abs(A.brownian_tail_approx(M, t, 3 * t, exact=True).relative_error) for t in (10.0, 20.0, 40.0)]
    assert errs[0] > errs[1] > errs[2]


def test_tail_leading_consistency():
    t, y = 5.0, 400.0
    rep = A.brownian_tail_approx(M, t, y)
    L = y * y / (4 * t)
    r = 4 * t * t / (y * y)
    lead = math.exp(-t - L) / math.sqrt(4 * math.pi * t) * (1 + r / (1 - M))
    assert rep.approximation == pytest.approx(lead, rel=r * r * 10)


def test_tail_negligible_against_rho_form():
    model = R.ResetModel(K.Brownian(1), m=M)
    t = 10.0
    q = [math.exp(R.p_reset_log_origin(model, t, y) + y) for y in (25.0, 50.0, 100.0, 200.0)]
    assert all(b < a for a, b in zip(q, q[1:]))
    assert q[-1] < 1e-100


def test_tail_refuses_bulk():
    with pytest.raises(A.RegimeError):
        A.brownian_tail_approx(M, 10.0, 14.0)


def test_stable_symmetric_diagnostic():
    model = R.ResetModel(K.SymmetricStable1D(1.2), m=M)
    assert abs(A.stable_ratio_diagnostic(model, 50.0, 0.0, 200.0)) < 0.05


def test_stable_subordinator_diagnostic():
    model = R.ResetModel(K.SubordinatorGeneral(0.5), m=M)
    assert abs(A.stable_ratio_diagnostic(model, 50.0, 0.0, 200.0)) < 0.05


def test_stable_scaled_diagnostic_tends_to_zero():
    model = R.ResetModel(K.SymmetricStable1D(1.2), m=M)
    vals = [abs(A.stable_ratio_diagnostic(model, t, 0.0, 50.0, scaled=True)) for t in (5.0, 20.0, 80.0)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[-1] < 1e-3


def test_rho_ratio_diagnostic():
    model = R.ResetModel(K.SymmetricStable1D(1.5), m=0.3)
    assert abs(A.rho_ratio_diagnostic(model, 300.0)) * 0.7 < 0.05


def test_rho_comparable_to_levy_density():
    model = R.ResetModel(K.SymmetricStable1D(1.5), m=0.3)
    y = np.geomspace(0.01, 1e3, 30)
    q = R.rho(model, y) / np.minimum(1.0, model.kernel.levy_density(y))
    assert 0.05 < q.min() and q.max() < 20


def test_subordinator_rho_comparable_away_from_origin():
    model = R.ResetModel(K.SubordinatorGeneral(0.5), m=M)
    y = np.geomspace(0.1, 1e3, 30)
    q = R.rho(model, y) / model.kernel.levy_density(y)
    assert 0.01 < q.min() and q.max() < 20


def test_cylindrical_limit_and_diagnostic():
    model = R.ResetModel(K.Cylindrical(1.3, 2), m=M)
    lim = A.cylindrical_limit(model, [1, 0])
    assert lim > 0
    vals = [abs(A.stable_ratio_diagnostic(model, 30.0, np.zeros(2), None, theta=[1, 0], r=r)) for r in (50.0, 200.0)]
    assert vals[1] < vals[0] < 0.05 * lim


def test_cylindrical_limit_all_directions_is_moment():
    # with every coordinate moving, the limit is the d-th moment of mu
    from reset_kernels.measures import mu_limit_moment

    model = R.ResetModel(K.Cylindrical(1.3, 2), m=M)
    assert A.cylindrical_limit(model, [1, 1]) == pytest.approx(mu_limit_moment(2.0, M), rel=1e-9)


def test_diagnostic_kernel_errors():
    with pytest.raises(K.KernelError):
        A.stable_ratio_diagnostic(R.ResetModel(K.Brownian(1), m=M), 10.0, 0.0, 5.0)
    with pytest.raises(K.KernelError):
        A.cylindrical_limit(R.ResetModel(K.Brownian(1), m=M), [1])
