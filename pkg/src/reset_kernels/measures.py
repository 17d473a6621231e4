"""The mixing measures mu_t and mu, and the generating functions phi, Phi, vartheta.

mu_t(du) = e^{-t} delta_t(du) + e^{-t} sum_{j>=1} t^j P_j(u/t) du/t is the law of
the effective elapsed time; mu is its weak limit as t -> infinity.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special, stats

from .qspecial import (
    _check_q,
    gamma_ratio,
    log_gamma_ratio,
    log_q_pochhammer_inf,
    q_pochhammer,
)
from .splines import SplineFamily, SplineRangeError, get_family

__all__ = [
    "DepthError",
    "MuMeasure",
    "truncation_index",
    "mu_t_moment",
    "mu_t_integer_moment",
    "mu_limit_moment",
    "mu_density",
    "mu_t_density",
    "phi",
    "log_phi",
    "phi_ratio",
    "phi_log_concavity",
    "phi_deficit",
    "Phi",
    "Phi_closed",
    "vartheta",
]

T_MAX = 700.0
_SERIES_TOL = 1e-18
_MASS_TOL = 1e-18


class DepthError(SplineRangeError):
    """The spline family is too shallow for the requested time."""

    def __init__(self, required: int, available: int):
        super().__init__(f"need max_n >= {required}, family has {available}")
        self.required = required


def _check_t(t: float) -> float:
    t = float(t)
    if not (0.0 <= t <= T_MAX):
        raise ValueError(f"t must lie in [0, {T_MAX}], got {t}")
    return t


def truncation_index(t: float) -> int:
    """Smallest J >= 1 whose Poisson(t) tail beyond J is below 1e-18.

    The j-th term of every spline series carries mass e^{-t} t^j/j!, so this
    bounds the neglected mass of the density representation.
    """
    t = _check_t(t)
    if t == 0:
        return 1
    j = max(1, int(t))
    while stats.poisson.sf(j, t) >= _MASS_TOL:
        j += max(1, int(math.sqrt(t)) // 4)
    while j > 1 and stats.poisson.sf(j - 1, t) < _MASS_TOL:
        j -= 1
    return j


def _family_for(m: float, t: float, family: SplineFamily | None) -> tuple[SplineFamily, int]:
    J = truncation_index(t)
    if family is None:
        return get_family(m, J), J
    if family.max_n < J:
        raise DepthError(J, family.max_n)
    return family, J


# -- moments -------------------------------------------------------------


def _log_qfact(j: int, m: float) -> float:
    """log Gamma_m(j+1) = log [j]_m!."""
    return math.log(q_pochhammer(m, m, j)) - j * math.log1p(-m)


def mu_t_moment(gamma: float, t: float, m: float) -> float:
    """int u^gamma mu_t(du) via the Gamma_m series, for any real gamma."""
    m = _check_q(m)
    t = _check_t(t)
    if t == 0:
        raise ValueError("t must be positive")
    lt = math.log(t)
    _, lg0 = log_gamma_ratio(gamma, m)
    total = 0.0
    peak = -math.inf
    j = 0
    while True:
        _, lgj = log_gamma_ratio(j + gamma, m)
        lterm = -t + (j + gamma) * lt - _log_qfact(j, m) - lgj + lg0
        term = math.exp(lterm)
        total += term
        peak = max(peak, lterm)
        if j > t and lterm < peak and term < _SERIES_TOL * total:
            return total
        j += 1
        if j > 20000:
            raise ArithmeticError("moment series did not converge")


def _complete_homogeneous(nodes: np.ndarray, rmax: int) -> np.ndarray:
    """h_r(nodes) for r = 0..rmax."""
    h = np.ones(rmax + 1)
    h[1:] = 0.0
    first = True
    for x in nodes:
        if first:
            h = x ** np.arange(rmax + 1)
            first = False
            continue
        for r in range(1, rmax + 1):
            h[r] += x * h[r - 1]
    return h


def mu_t_integer_moment(k: int, t: float, m: float) -> float:
    """k! sum_j e^{-(1-m^j) t} / prod_{i != j} (m^j - m^i).

    The alternating sum is a divided difference of x -> e^{-(1-x)t} on the
    nodes 1, m, ..., m^k. When it is ill-conditioned it is evaluated instead as
    the equal positive series e^{-t} sum_{n>=k} t^n/n! h_{n-k}(1, m, ..., m^k).
    """
    m = _check_q(m)
    t = _check_t(t)
    k = int(k)
    if not (0 <= k <= 30):
        raise ValueError("k must lie in 0..30")
    if k == 0:
        return 1.0
    x = m ** np.arange(k + 1, dtype=float)
    terms = np.empty(k + 1)
    for j in range(k + 1):
        diffs = x[j] - np.delete(x, j)
        terms[j] = np.exp(-(1.0 - x[j]) * t) / np.prod(diffs)
    direct = math.factorial(k) * math.fsum(terms)
    cond = math.factorial(k) * np.sum(np.abs(terms)) / abs(direct) if direct else math.inf
    if cond * 1e-16 < 1e-14:
        return direct
    nmax = k + int(t + 12.0 * math.sqrt(t) + 60)
    h = _complete_homogeneous(x, nmax - k)
    n = np.arange(k, nmax + 1)
    logw = -t + n * math.log(t) - special.gammaln(n + 1.0) if t > 0 else None
    return float(math.factorial(k) * np.sum(np.exp(logw) * h))


def mu_limit_moment(gamma: float, m: float) -> float:
    """int u^gamma mu(du) = Gamma(gamma+1)/Gamma_m(gamma+1) (1-m)^{-gamma}."""
    m = _check_q(m)
    return gamma_ratio(gamma, m) * (1.0 - m) ** (-gamma)


# -- densities --------------------------------------------------------------


@lru_cache(maxsize=64)
def _mu_coefficients(m: float) -> tuple[np.ndarray, np.ndarray]:
    """Rates m^{-k} and coefficients (-1)^k m^{k(k-1)/2}/((m;m)_k (m;m)_inf)."""
    inv_inf = 1.0 / q_pochhammer(m, m)
    coef, rate = [], []
    k = 0
    while True:
        c = (-1) ** k * math.exp(k * (k - 1) / 2 * math.log(m)) / q_pochhammer(m, m, k) * inv_inf
        r = m ** (-k)
        coef.append(c)
        rate.append(r)
        if abs(c) < 1e-300 or r > 1e300:
            break
        k += 1
    return np.array(rate), np.array(coef)


def mu_density(u, m: float, clamp: bool = False):
    """Density of the limit measure mu.

    Alternating exponential series, summed in adjacent pairs; terms whose
    exponent m^{-k} u exceeds 745 underflow and are dropped. ``clamp`` sets
    round-off negatives to zero and is meant for output only.
    """
    m = _check_q(m)
    u = np.asarray(u, dtype=float)
    rate, coef = _mu_coefficients(m)
    flat = u.ravel()
    out = np.zeros(flat.shape)
    pos = flat > 0
    up = flat[pos]
    expo = np.multiply.outer(up, rate)
    with np.errstate(under="ignore"):
        terms = np.where(expo < 745.0, coef * np.exp(-np.minimum(expo, 745.0)), 0.0)
    if terms.shape[1] % 2:
        terms = np.concatenate([terms, np.zeros((terms.shape[0], 1))], axis=1)
    pairs = terms[:, 0::2] + terms[:, 1::2]
    out[pos] = pairs[:, ::-1].sum(axis=1)
    out = out.reshape(u.shape)
    if clamp:
        out = np.maximum(out, 0.0)
    return out if out.ndim else float(out)


def mu_t_density(s, t: float, m: float, family: SplineFamily | None = None):
    """Absolutely continuous part of mu_t: e^{-t} sum_j t^{j-1} P_j(s/t) on (0, t)."""
    t = _check_t(t)
    fam, J = _family_for(m, t, family)
    s = np.asarray(s, dtype=float)
    u = s / t
    lt = math.log(t)
    acc = np.zeros(s.shape)
    for j in range(1, J + 1):
        w = math.exp(-t + (j - 1) * lt - fam.log_norm[j])
        if w == 0.0:
            continue
        acc += w * fam.eval_Q(j, u)
    return acc if acc.ndim else float(acc)


class MuMeasure:
    """mu_t for finite t (atom plus spline density) or the limit mu for t = inf."""

    def __init__(self, m: float, t: float = math.inf, family: SplineFamily | None = None):
        self.m = _check_q(m)
        self.t = float(t)
        if math.isinf(self.t):
            self.family = None
            self.J = None
        else:
            self.family, self.J = _family_for(self.m, self.t, family)

    @property
    def atom(self) -> tuple[float, float]:
        """(location, mass) of the atom; mass 0 for the limit measure."""
        if math.isinf(self.t):
            return (0.0, 0.0)
        return (self.t, math.exp(-self.t))

    def density(self, u):
        if math.isinf(self.t):
            return mu_density(u, self.m)
        return mu_t_density(u, self.t, self.m, self.family)

    def moment(self, gamma: float) -> float:
        if math.isinf(self.t):
            return mu_limit_moment(gamma, self.m)
        return mu_t_moment(gamma, self.t, self.m)

    def tail_mass(self) -> float:
        """Mass of the series terms beyond the truncation index J(t)."""
        if math.isinf(self.t):
            return 0.0
        return float(stats.poisson.sf(self.J, self.t))


# -- phi and friends ------------------------------------------------------------


_EPS_SIZE = 2048


def _eps_table(m: float, size: int) -> np.ndarray:
    if size > _EPS_SIZE:
        raise ValueError("eps table request too large")
    return _eps_full(m)[:size]


@lru_cache(maxsize=64)
def _eps_full(m: float) -> np.ndarray:
    """eps_n = 1 - (m^{n+1}; m)_inf for n = 0..size-1, without cancellation.

    1/(m;m)_n = (1 - eps_n)/(m;m)_inf.
    """
    out = np.empty(_EPS_SIZE)
    for n in range(_EPS_SIZE):
        s = log_q_pochhammer_inf(m ** (n + 1), m) if m ** (n + 1) > 0 else 0.0
        out[n] = -math.expm1(s)
    return out


def _poisson_weights(t: float) -> tuple[np.ndarray, np.ndarray]:
    if t == 0:
        return np.array([0]), np.array([1.0])
    hi = int(t + 12.0 * math.sqrt(t) + 40)
    lo = max(0, int(t - 12.0 * math.sqrt(t) - 40))
    j = np.arange(lo, hi + 1)
    w = np.exp(-t + j * math.log(t) - special.gammaln(j + 1.0))
    return j, w


def phi_deficit(k: int, t: float, m: float) -> float:
    """D_k(t) = 1 - (m;m)_inf e^{-t} phi^{(k)}(t), computed without cancellation."""
    m = _check_q(m)
    t = _check_t(t)
    j, w = _poisson_weights(t)
    eps = _eps_table(m, int(j[-1]) + k + 2)
    return float(np.sum(w * eps[j + k + 1]))


def log_phi(k: int, t: float, m: float) -> float:
    """log phi^{(k)}(t); phi^{(k)} is positive so no sign is needed."""
    m = _check_q(m)
    t = _check_t(t)
    return t - log_q_pochhammer_inf(m, m) + math.log1p(-phi_deficit(k, t, m))


def phi(k: int, t: float, m: float) -> float:
    """phi^{(k)}(t) = sum_j t^j/j! / (m;m)_{j+k+1}."""
    return math.exp(log_phi(k, t, m))


def phi_ratio(k: int, t: float, m: float) -> float:
    """phi^{(k)}(t)/phi(t)."""
    return (1.0 - phi_deficit(k, t, m)) / (1.0 - phi_deficit(0, t, m))


def phi_log_concavity(t: float, m: float) -> float:
    """(phi'' phi - phi'^2)/phi^2, formed from the small deficits directly."""
    d0, d1, d2 = (phi_deficit(k, t, m) for k in (0, 1, 2))
    num = (2.0 * d1 - d0 - d2) + (d0 * d2 - d1 * d1)
    return num / (1.0 - d0) ** 2


def Phi(t: float, u, family: SplineFamily | None = None, m: float | None = None):
    """Phi(t, u) = sum_{j>=1} t^j P_j(u), truncated at J(t).

    Pass either a family or m (a shared family of sufficient depth is used).
    """
    if family is None and m is None:
        raise ValueError("need a spline family or m")
    m = family.m if family is not None else m
    t = _check_t(t)
    fam, J = _family_for(m, t, family)
    u = np.asarray(u, dtype=float)
    lt = math.log(t)
    logw = np.array([j * lt - fam.log_norm[j] for j in range(1, J + 1)])
    top = logw.max()
    acc = np.zeros(u.shape)
    for j in range(1, J + 1):
        w = math.exp(logw[j - 1] - top)
        if w < 1e-300:
            continue
        acc += w * fam.eval_Q(j, u)
    out = acc * math.exp(top)
    return out if out.ndim else float(out)


def Phi_closed(t: float, u, m: float):
    """t phi(t(1-u)), the exact value of Phi on [m, 1]."""
    u = np.asarray(u, dtype=float)
    out = np.array([t * phi(0, t * (1.0 - uu), m) for uu in u.ravel()]).reshape(u.shape)
    return out if out.ndim else float(out)


def vartheta(r: float, m: float) -> float:
    """sum_j r^j/(m;m)_{j+1} for 0 <= r < 1 - 1e-9.

    Written as (1/(1-r) - sum_j r^j eps_{j+1})/(m;m)_inf, whose remaining sum
    converges geometrically in m rather than in r.
    """
    m = _check_q(m)
    if not (0.0 <= r < 1.0 - 1e-9):
        raise ValueError("vartheta needs 0 <= r < 1 - 1e-9")
    size = 2 + int(60.0 / -math.log(m)) + 10
    eps = _eps_table(m, size + 2)
    j = np.arange(size)
    corr = np.sum(r**j * eps[j + 1])
    return (1.0 / (1.0 - r) - corr) / q_pochhammer(m, m)
