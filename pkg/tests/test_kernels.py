import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from reset_kernels import kernels as K


def symmetric_series(alpha, z, dps=40):
    """Convergent series for the unit symmetric stable density, in mpmath."""
    with mpmath.workdps(dps):
        z = mpmath.mpf(abs(z))
        a = mpmath.mpf(alpha)
        if alpha > 1:
            s = mpmath.nsum(lambda k: (-1) ** k * mpmath.gamma((2 * k + 1) / a) / mpmath.factorial(2 * k) * z ** (2 * k), [0, mpmath.inf])
            return float(s / (mpmath.pi * a))
        s = mpmath.nsum(
            lambda k: (-1) ** (k + 1) * mpmath.gamma(a * k + 1) / mpmath.factorial(k) * mpmath.sin(mpmath.pi * a * k / 2) * z ** (-a * k - 1),
            [1, mpmath.inf],
        )
        return float(s / mpmath.pi)


def line_mass(f, one_sided=False):
    e = np.linspace(-45, 25, 141)
    a, b = np.exp(e[:-1]), np.exp(e[1:])
    x, w = np.polynomial.legendre.leggauss(32)
    r = (0.5 * (b - a)[:, None] * (x + 1) + a[:, None]).ravel()
    ww = (0.5 * (b - a)[:, None] * w).ravel()
    tot = float(f(r) @ ww)
    if not one_sided:
        tot += float(f(-r) @ ww)
    return tot


def levy_tail_mass(kern, cut, terms=6, g=0.0):
    # integral of |z|^g times the large-z series beyond the cut
    a = kern.alpha
    one = getattr(kern, "one_sided", False)
    arg = math.pi * a if one else math.pi * a / 2
    tot = math.fsum(
        (-1) ** (k + 1) * math.gamma(a * k + 1) / math.factorial(k) * math.sin(arg * k) * cut ** (g - a * k) / (a * k - g)
        for k in range(1, terms + 1)
    )
    return tot / math.pi * (1 if one else 2)


KERNELS_1D = [
    K.Brownian(1),
    K.SymmetricStable1D(0.6),
    K.SymmetricStable1D(1.2),
    K.SymmetricStable1D(1.8),
    K.Cauchy1D(0.0),
    K.Cauchy1D(0.8),
    K.SubordinatorHalf(),
    K.SubordinatorGeneral(0.3),
    K.SubordinatorGeneral(0.75),
]
IDS = ["brownian", "sym0.6", "sym1.2", "sym1.8", "cauchy", "cauchy_drift", "sub_half", "sub0.3", "sub0.75"]


def test_brownian_origin_value():
    assert K.p0(K.Brownian(1), 1.0, 0.0, 0.0) == pytest.approx((4 * math.pi) ** -0.5, rel=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_brownian_in_dimension_d(d):
    y = np.full(d, 0.4)
    exact = (4 * math.pi * 0.7) ** (-d / 2) * math.exp(-0.16 * d / (4 * 0.7))
    assert K.p0(K.Brownian(d), 0.7, np.zeros(d), y) == pytest.approx(exact, rel=1e-14)


def test_half_stable_closed_form():
    assert K.p0(K.SubordinatorHalf(), 1.0, 0.0, 1.0) == pytest.approx(math.exp(-0.25) / math.sqrt(4 * math.pi), rel=1e-15)


def test_stable_alpha_one_is_cauchy():
    z = np.linspace(-30, 30, 241)
    a = K.SymmetricStable1D(1.0).density(1.3, z)
    b = K.Cauchy1D(0.0).density(1.3, z)
    assert np.max(np.abs(a / b - 1)) < 1e-8


@pytest.mark.parametrize("alpha", [0.4, 0.8, 1.3, 1.5, 1.9])
@pytest.mark.parametrize("z", [0.0, 0.3, 1.0, 3.0, 12.0])
def test_symmetric_density_against_series(alpha, z):
    if alpha < 1 and z == 0.0:
        ref = math.gamma(1 + 1 / alpha) / math.pi
    else:
        ref = symmetric_series(alpha, z)
    assert K.SymmetricStable1D(alpha).density(1.0, z) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("z", [0.0, 0.5, 2.0, 7.0])
def test_inversion_alpha_two_is_gaussian(z):
    assert K.stable_density_inversion(2.0, 1.0, z) == pytest.approx(math.exp(-z * z / 4) / math.sqrt(4 * math.pi), rel=1e-10)


@pytest.mark.parametrize("z", [0.05, 0.3, 1.0, 4.0, 50.0])
def test_subordinator_inversion_matches_half_stable(z):
    exact = K.SubordinatorHalf().density(1.0, z)
    assert K.stable_density_inversion(0.5, 1.0, z, "subordinator") == pytest.approx(exact, rel=1e-8)
    assert K.SubordinatorGeneral(0.5).density(1.0, z) == pytest.approx(exact, rel=1e-8)


def test_subordinator_against_talbot_inversion():
    for a, x in [(0.3, 0.5), (0.7, 1.2), (0.7, 3.0)]:
        ref = float(mpmath.invertlaplace(lambda u: mpmath.exp(-(u**a)), x, method="talbot"))
        assert K.SubordinatorGeneral(a).density(1.0, x) == pytest.approx(ref, rel=1e-9)


def test_stable_tail_approaches_levy_density():
    kern = K.SymmetricStable1D(1.5)
    assert kern.density(1.0, 50.0) / kern.levy_density(50.0) == pytest.approx(1.0, rel=0.02)


def test_levy_density_examples():
    assert K.levy_density(K.SymmetricStable1D(1.0), 3.0) == pytest.approx(1 / (math.pi * 9), rel=1e-14)
    assert K.levy_density(K.SubordinatorGeneral(0.5), 2.0) == pytest.approx(0.5 / math.gamma(0.5) * 2**-1.5, rel=1e-14)


@pytest.mark.parametrize("kern", [K.SymmetricStable1D(0.7), K.SymmetricStable1D(1.6), K.SubordinatorGeneral(0.4)])
def test_levy_density_homogeneity(kern):
    for y in (0.3, 2.0, 17.0):
        assert kern.levy_density(2 * y) / kern.levy_density(y) == pytest.approx(2 ** (-1 - kern.alpha), rel=1e-13)


def test_levy_density_unsupported():
    with pytest.raises(K.KernelError):
        K.levy_density(K.Brownian(1), 1.0)
    with pytest.raises(K.KernelError):
        K.SubordinatorHalf().levy_density(-1.0)


@pytest.mark.parametrize("kern", KERNELS_1D, ids=IDS)
def test_normalisation(kern):
    one_sided = getattr(kern, "one_sided", False)
    drift = getattr(kern, "drift", 0.0)
    f = lambda r: kern.density(1.0, r + drift)  # noqa: E731
    tot = line_mass(f, one_sided)
    if not isinstance(kern, K.Brownian):
        tot += levy_tail_mass(kern, math.exp(25))
    assert tot == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("kern", KERNELS_1D, ids=IDS)
def test_nonnegative(kern):
    z = np.linspace(-40, 40, 801)
    assert np.all(kern.density(0.8, z) >= 0.0)


SYMMETRIC = [(k, i) for k, i in zip(KERNELS_1D, IDS) if i.startswith(("sym", "brown")) or i == "cauchy"]


@pytest.mark.parametrize("kern", [k for k, _ in SYMMETRIC], ids=[i for _, i in SYMMETRIC])
def test_symmetry_and_unimodality(kern):
    z = np.linspace(0, 60, 601)
    p = kern.density(1.0, z)
    assert np.array_equal(p, kern.density(1.0, -z))
    assert np.all(np.diff(p) <= 1e-15 * p[0])


@pytest.mark.parametrize("kern", KERNELS_1D, ids=IDS)
def test_scaling_law(kern):
    rng = np.random.default_rng(8)
    a = kern.alpha
    for t, u, x, y in zip(rng.uniform(0.2, 5, 100), rng.uniform(0.2, 3, 100), rng.uniform(-2, 2, 100), rng.uniform(-5, 5, 100)):
        if getattr(kern, "drift", 0.0):
            continue
        lhs = kern.p0(t * u, x, y)
        rhs = t ** (-1 / a) * kern.p0(u, t ** (-1 / a) * x, t ** (-1 / a) * y)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-300)


def test_cylindrical_is_a_product():
    kern = K.Cylindrical(1.3, 2)
    y = np.array([0.4, -2.0])
    f = K.SymmetricStable1D(1.3)
    assert K.p0(kern, 2.0, np.zeros(2), y) == pytest.approx(f.density(2.0, 0.4) * f.density(2.0, -2.0), rel=1e-15)
    assert kern.levy_density(3.0) == f.levy_density(3.0)


def test_chapman_kolmogorov_brownian():
    kern = K.Brownian(1)
    s, t, x, y = 0.4, 0.9, 0.2, 1.1
    v, _ = integrate.quad(lambda z: kern.p0(s, x, z) * kern.p0(t, z, y), -np.inf, np.inf, epsabs=0, epsrel=1e-12)
    assert v == pytest.approx(kern.p0(s + t, x, y), abs=1e-6)


def test_chapman_kolmogorov_stable():
    kern = K.SymmetricStable1D(1.4)
    s, t = 0.5, 0.7
    z = np.linspace(-400, 400, 400001)
    conv = np.trapezoid(kern.density(s, z) * kern.density(t, 1.0 - z), z)
    assert conv == pytest.approx(kern.density(s + t, 1.0), rel=1e-4)


@pytest.mark.parametrize("g", [-0.5, 0.5, 1.5, 4.0])
def test_brownian_absolute_moment(g):
    exact = 2**g * math.gamma((1 + g) / 2) / math.sqrt(math.pi)
    assert K.Brownian(1).abs_moment(g) == pytest.approx(exact, rel=1e-14)


@pytest.mark.parametrize("alpha,g", [(1.5, 0.5), (1.5, -0.5), (0.8, 0.3)])
def test_symmetric_absolute_moment_by_quadrature(alpha, g):
    kern = K.SymmetricStable1D(alpha)
    num = line_mass(lambda r: np.abs(r) ** g * kern.density(1.0, r)) + levy_tail_mass(kern, math.exp(25), g=g)
    assert kern.abs_moment(g) == pytest.approx(num, rel=1e-6)


def test_subordinator_moment_by_quadrature():
    kern = K.SubordinatorGeneral(0.5)
    num = line_mass(lambda r: r**0.2 * kern.density(1.0, r), one_sided=True) + levy_tail_mass(kern, math.exp(25), g=0.2)
    assert kern.abs_moment(0.2) == pytest.approx(num, rel=1e-6)


def test_moment_window():
    with pytest.raises(K.KernelError):
        K.SubordinatorGeneral(0.5).abs_moment(0.6)
    with pytest.raises(K.KernelError):
        K.Brownian(1).abs_moment(-1.0)


@pytest.mark.parametrize("bad", [0.0, 2.0, -1.0])
def test_invalid_alpha(bad):
    with pytest.raises(K.KernelError):
        K.SymmetricStable1D(bad)


def test_nonpositive_time():
    with pytest.raises(K.KernelError):
        K.p0(K.Brownian(1), 0.0, 0.0, 1.0)
    with pytest.raises(K.KernelError):
        K.stable_density_inversion(1.2, -1.0, 0.0)


@pytest.mark.parametrize("alpha", [0.7, 1.3, 1.8])
@pytest.mark.parametrize("x", [0.0, 0.7, 2.5])
def test_symmetric_generator_against_fourier(alpha, x):
    # f = exp(-x^2) has transform sqrt(pi) exp(-w^2/4); the symbol is -|w|^alpha
    ref = -integrate.quad(lambda w: w**alpha * math.sqrt(math.pi) * math.exp(-w * w / 4) * math.cos(w * x), 0, 60, epsabs=1e-14, limit=200)[0] / math.pi
    f = lambda s: np.exp(-s * s)  # noqa: E731
    d2f = lambda s: (4 * s * s - 2) * np.exp(-s * s)  # noqa: E731
    assert K.SymmetricStable1D(alpha).generator(f, x, d2f=d2f) == pytest.approx(ref, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("x", [0.0, 0.5, 3.0])
def test_cauchy_generator_on_poisson_kernel(x):
    # the Cauchy semigroup maps P_s to P_{s+t}, so L P_1 = d/ds P_s at s = 1
    f = lambda s: 1 / (math.pi * (1 + s * s))  # noqa: E731
    exact = (x * x - 1) / (math.pi * (1 + x * x) ** 2)
    assert K.Cauchy1D(0.0).generator(f, x) == pytest.approx(exact, rel=1e-7, abs=1e-10)
