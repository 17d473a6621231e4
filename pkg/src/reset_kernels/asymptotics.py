"""Large-time asymptotics of the resetting density and the regime classifier.

For Brownian kernels the behaviour is governed by v = |y|^2/(4t^2) = L/t with
L = |y|^2/(4t):

    bulk      m^2 + delta <= v <= 1 - delta   p ~ rho-tail form e^{-|y|} ...
    tail      v >= 1 + delta                  p ~ free Gaussian times a theta correction
    uncovered everything else (no asymptotic claim is made there)

For stable kernels the density at large |y| is compared with the Levy density.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import Brownian, Cylindrical, KernelError, SymmetricStable1D, _Subordinator
from .measures import log_phi, phi_log_concavity, phi_ratio, vartheta
from .qspecial import _check_q, log_q_pochhammer_inf
from .resetdensity import ResetModel, _mixture_nodes, p_reset, p_reset_log_origin, rho

__all__ = [
    "RegimeError",
    "RegimeReport",
    "CriticalPoint",
    "classify_regime",
    "psi",
    "psi_prime",
    "psi_second",
    "psi_and_critical_point",
    "brownian_bulk_approx",
    "brownian_tail_approx",
    "stable_ratio_diagnostic",
    "rho_ratio_diagnostic",
    "cylindrical_limit",
]

DEFAULT_DELTA = 0.05


class RegimeError(ValueError):
    """The point lies outside the region where the requested asymptotic holds."""


@dataclass(frozen=True)
class RegimeReport:
    regime: str
    L: float
    approximation: float | None = None
    error_estimate: float | None = None
    exact_reference: float | None = None

    @property
    def relative_error(self) -> float | None:
        if self.approximation is None or self.exact_reference is None:
            return None
        return self.approximation / self.exact_reference - 1.0


@dataclass(frozen=True)
class CriticalPoint:
    u0: float
    psi: float
    psi2: float
    iterations: int
    residual: float
    psi_prime_m: float


def _radius(y) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.sqrt(np.sum(y * y)))


def classify_regime(m: float, t: float, y, delta: float = DEFAULT_DELTA) -> RegimeReport:
    """Regime of (t, y) by v = |y|^2/(4t^2); the boundary bands are 'uncovered'."""
    m = _check_q(m)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if t <= 0:
        raise ValueError("t must be positive")
    r = _radius(y)
    L = r * r / (4.0 * t)
    v = L / t
    if m * m + delta <= v <= 1.0 - delta:
        regime = "bulk"
    elif v >= 1.0 + delta:
        regime = "tail"
    else:
        regime = "uncovered"
    return RegimeReport(regime, L)


# -- the Laplace exponent -------------------------------------------------------


def psi(u: float, m: float, t: float, L: float, d: int) -> float:
    """psi(u) = -(d/2) log u - L/u + log phi(t(1-u))."""
    return -0.5 * d * math.log(u) - L / u + log_phi(0, t * (1.0 - u), m)


def psi_prime(u: float, m: float, t: float, L: float, d: int) -> float:
    return -0.5 * d / u + L / (u * u) - t * phi_ratio(1, t * (1.0 - u), m)


def psi_second(u: float, m: float, t: float, L: float, d: int) -> float:
    """psi'' from the log-concavity of phi; no differences of large numbers."""
    return 0.5 * d / (u * u) - 2.0 * L / u**3 + t * t * phi_log_concavity(t * (1.0 - u), m)


def psi_and_critical_point(m: float, t: float, L: float, d: int = 1) -> CriticalPoint:
    """Critical point u0 of psi in (m, 1) by safeguarded Newton.

    Seed sqrt(L/t) - d/(4t); steps leaving the current sign bracket are
    replaced by bisection.
    """
    m = _check_q(m)
    if t <= 0 or L <= 0:
        raise ValueError("t and L must be positive")
    lo, hi = m, 1.0
    f_lo = psi_prime(lo, m, t, L, d)
    f_hi = psi_prime(hi, m, t, L, d)
    if not (f_lo > 0 > f_hi):
        raise RegimeError(f"psi' has no sign change on (m, 1): psi'(m)={f_lo:.3g}, psi'(1)={f_hi:.3g}")
    u = math.sqrt(L / t) - d / (4.0 * t)
    if not (lo < u < hi):
        u = 0.5 * (lo + hi)
    tol = 1e-10 * t
    it = 0
    for it in range(1, 201):
        f = psi_prime(u, m, t, L, d)
        if f > 0:
            lo = u
        else:
            hi = u
        if abs(f) <= tol or hi - lo < 1e-15:
            break
        f2 = psi_second(u, m, t, L, d)
        step = u - f / f2 if f2 < 0 else math.nan
        u = step if lo < step < hi else 0.5 * (lo + hi)
    res = psi_prime(u, m, t, L, d)
    return CriticalPoint(u, psi(u, m, t, L, d), psi_second(u, m, t, L, d), it, abs(res), f_lo)


def _require(report: RegimeReport, regime: str):
    if report.regime != regime:
        raise RegimeError(f"(t, y) is in the {report.regime} regime, expected {regime}")


def _exact_log(m, t, y, d):
    model = ResetModel(Brownian(d), m=m)
    yy = np.asarray(y, dtype=float)
    if d == 1:
        yy = float(np.ravel(yy)[0]) if yy.ndim else float(yy)
    return p_reset_log_origin(model, t, yy)


def brownian_bulk_approx(
    m: float,
    t: float,
    y,
    d: int = 1,
    method: str = "steepest_descent",
    delta: float = DEFAULT_DELTA,
    exact: bool = False,
) -> RegimeReport:
    """Bulk-regime asymptotic of p(t; 0, y) for Brownian kernels.

    ``leading``: (1/2) (m;m)_inf^{-1} (2 pi)^{-(d-1)/2} |y|^{-(d-1)/2} e^{-|y|}.
    ``steepest_descent``: e^{-t} (4 pi t)^{-d/2} t e^{psi(u0)} sqrt(2 pi / -psi''(u0)).
    Both carry a relative error O(1/t), reported as 1/t. With ``exact`` the
    quadrature value of p is attached for comparison.
    """
    rep = classify_regime(m, t, y, delta)
    _require(rep, "bulk")
    r = _radius(y)
    if method == "leading":
        logv = (
            -math.log(2.0)
            - log_q_pochhammer_inf(m, m)
            - 0.5 * (d - 1) * math.log(2.0 * math.pi * r)
            - r
        )
    elif method == "steepest_descent":
        cp = psi_and_critical_point(m, t, rep.L, d)
        logv = (
            -t
            - 0.5 * d * math.log(4.0 * math.pi * t)
            + math.log(t)
            + cp.psi
            + 0.5 * math.log(2.0 * math.pi / -cp.psi2)
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    ref = math.exp(_exact_log(m, t, y, d)) if exact else None
    return RegimeReport("bulk", rep.L, math.exp(logv), 1.0 / t, ref)


def brownian_tail_approx(
    m: float, t: float, y, d: int = 1, delta: float = DEFAULT_DELTA, exact: bool = False
) -> RegimeReport:
    """Tail-regime asymptotic e^{-t} (4 pi t)^{-d/2} e^{-L} {1 + r theta(r)}, r = 4t^2/|y|^2.

    The relative error is O(t/|y|^2), reported as t/|y|^2.
    """
    rep = classify_regime(m, t, y, delta)
    _require(rep, "tail")
    r2 = _radius(y) ** 2
    r = 4.0 * t * t / r2
    if r >= 1.0:
        raise ValueError("4t^2/|y|^2 must be below 1")
    logv = -t - 0.5 * d * math.log(4.0 * math.pi * t) - rep.L + math.log1p(r * vartheta(r, m))
    ref = math.exp(_exact_log(m, t, y, d)) if exact else None
    return RegimeReport("tail", rep.L, math.exp(logv), t / r2, ref)


# -- stable kernels -----------------------------------------------------------------


def cylindrical_limit(model: ResetModel, theta, y=None) -> float:
    """L = int u^{d1} prod_{i in S0} q(u; 0, y_i) mu(du) for direction theta."""
    if not isinstance(model.kernel, Cylindrical):
        raise KernelError("cylindrical_limit needs a cylindrical kernel")
    theta = np.asarray(theta, dtype=float)
    d = model.d
    y = np.zeros(d) if y is None else np.asarray(y, dtype=float)
    s1 = theta != 0
    d1 = int(np.sum(s1))
    u, w = _mixture_nodes(model.m)
    f = u**d1
    q = model.kernel.factor
    for i in np.flatnonzero(~s1):
        f = f * q.density(u, y[i])
    return float(f @ w)


def _check_stable(model: ResetModel):
    if not isinstance(model.kernel, (SymmetricStable1D, _Subordinator, Cylindrical)):
        raise KernelError("ratio diagnostics need a symmetric stable, subordinator or cylindrical kernel")


def stable_ratio_diagnostic(model: ResetModel, t: float, x, y, theta=None, r=None, scaled: bool = False) -> float:
    """Distance of p from its Levy-density asymptote.

    One-dimensional kernels: (1-m) p(t; x, y)/nu(y) - 1, or with ``scaled``
    (1-m) t/(1 - e^{-(1-m)t}) p(t; x, t^{1/alpha} y)/(t nu(t^{1/alpha} y)) - 1.
    Cylindrical kernels: p(t; x, r theta + y)/prod_{theta_i != 0} nu(r theta_i) - L.
    """
    _check_stable(model)
    m = model.m
    if isinstance(model.kernel, Cylindrical):
        if theta is None or r is None:
            raise ValueError("cylindrical diagnostics need theta and r")
        theta = np.asarray(theta, dtype=float)
        y = np.zeros(model.d) if y is None else np.asarray(y, dtype=float)
        point = r * theta + y
        p = p_reset(model, t, np.asarray(x, dtype=float), point)
        nu = np.prod([model.kernel.levy_density(r * th) for th in theta if th != 0])
        return float(p / nu - cylindrical_limit(model, theta, y))
    if scaled:
        ys = t ** (1.0 / model.kernel.alpha) * float(y)
        p = p_reset(model, t, x, ys)
        fac = (1.0 - m) * t / -math.expm1(-(1.0 - m) * t)
        return float(fac * p / (t * model.kernel.levy_density(ys)) - 1.0)
    p = p_reset(model, t, x, y)
    return float((1.0 - m) * p / model.kernel.levy_density(y) - 1.0)


def rho_ratio_diagnostic(model: ResetModel, y) -> float:
    """rho(y)/nu(y) - 1/(1-m)."""
    _check_stable(model)
    if isinstance(model.kernel, Cylindrical):
        raise KernelError("use stable_ratio_diagnostic for cylindrical kernels")
    return float(rho(model, y) / model.kernel.levy_density(y) - 1.0 / (1.0 - model.m))
