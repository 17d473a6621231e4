"""Transition density p(t; x, y) of the process with partial resetting, its
stationary density rho, moments, the generator and the Fokker-Planck residual.

Between Poisson(1) epochs the position moves as the base stable process; at an
epoch it is multiplied by c. With m = c^alpha,

    p(t; x, y) = e^{-t} p_0(t; 0, y-x) + e^{-t} sum_{j>=1} t^j int_0^1 p_0(tu; 0, y - c^j x) P_j(u) du.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .kernels import Brownian, Cylindrical, KernelError, KernelModel
from .measures import (
    DepthError,
    Phi_closed,
    _check_t,
    _family_for,
    mu_density,
    mu_t_density,
    _mu_coefficients,
)
from .qspecial import _check_q, gamma_ratio, q_pochhammer
from .splines import SplineFamily, get_family

__all__ = [
    "ResetParams",
    "ResetModel",
    "ResolventFallbackWarning",
    "FDStepError",
    "FPResidual",
    "p_reset",
    "p_reset_origin",
    "p_reset_mixture",
    "rho",
    "rho_moment",
    "generator_apply",
    "fokker_planck_residual",
]

_SHIFT_TOL = 1e-14
_CANCEL_LIMIT = 1e6


class ResolventFallbackWarning(RuntimeWarning):
    """The resolvent series cancelled too much; the mixture value was used."""


class FDStepError(ValueError):
    """Finite-difference step outside the range where the estimate is meaningful."""


@dataclass(frozen=True)
class ResetParams:
    alpha: float
    c: float
    m: float
    d: int


@dataclass
class ResetModel:
    """A kernel together with the resetting factor.

    Give exactly one of ``c`` and ``m``; the other follows from m = c^alpha.
    ``family`` is optional: without it a shared spline family deep enough for
    each requested time is fetched automatically.
    """

    kernel: KernelModel
    c: float | None = None
    m: float | None = None
    family: SplineFamily | None = None
    eps_series: float = 1e-12
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if (self.c is None) == (self.m is None):
            raise ValueError("give exactly one of c and m")
        a = self.kernel.alpha
        if self.c is not None:
            self.c = float(_check_q(self.c))
            self.m = self.c**a
        else:
            self.m = float(_check_q(self.m))
            self.c = self.m ** (1.0 / a)
        _check_q(self.m)
        if self.family is not None and abs(self.family.m - self.m) > 1e-15:
            raise ValueError(f"family built for m={self.family.m}, model has m={self.m}")

    @property
    def params(self) -> ResetParams:
        return ResetParams(self.kernel.alpha, self.c, self.m, self.kernel.d)

    @property
    def d(self) -> int:
        return self.kernel.d

    # -- quadrature tables ------------------------------------------------------

    def _levels(self, t: float, J: int | None = None):
        """(u, W) with W[j-1, i] = e^{-t} t^j w_i P_j(u_i) on the spline grid."""
        key = ("levels", t, J)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        fam, J0 = _family_for(self.m, t, self.family)
        J = J0 if J is None else int(J)
        if fam.max_n < J:
            if self.family is not None:
                raise DepthError(J, fam.max_n)
            fam = get_family(self.m, J)
        u, w, Q = fam.grid(J)
        j = np.arange(1, J + 1)
        lw = -t + j * math.log(t) - np.array(fam.log_norm[1 : J + 1])
        with np.errstate(under="ignore"):
            W = np.exp(lw)[:, None] * Q * w[None, :]
        cols = np.any(W != 0.0, axis=0)
        out = (u[cols], W[:, cols])
        if len(self._cache) > 256:
            self._cache.clear()
        self._cache[key] = out
        return out

    def _origin_weights(self, t: float):
        """(u, log weights) for the Phi-form: w_i Phi(t, u_i), closed form on [m, 1]."""
        key = ("origin", t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        fam, J = _family_for(self.m, t, self.family)
        u, w, Q = fam.grid(J)
        top = u >= self.m
        logphi = np.empty(u.shape)
        logphi[top] = np.log(Phi_closed(t, u[top], self.m))
        lw = np.arange(1, J + 1) * math.log(t) - np.array(fam.log_norm[1 : J + 1])
        shift = lw.max()
        with np.errstate(under="ignore"):
            below = np.exp(lw - shift) @ Q[:, ~top]
        # round-off negatives of the deep proxies carry no mass
        with np.errstate(divide="ignore", invalid="ignore"):
            logphi[~top] = np.where(below > 0, np.log(below), -np.inf) + shift
        keep = np.isfinite(logphi)
        out = (u[keep], np.log(w[keep]) + logphi[keep])
        self._cache[key] = out
        return out

    # -- kernel plumbing ------------------------------------------------------------

    def _points(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.d > 1:
            if x.shape[-1:] != (self.d,) or y.shape[-1:] != (self.d,):
                raise KernelError(f"points must have trailing dimension {self.d}")
        return x, y

    def _kernel_on_nodes(self, s, z):
        """p_0(s_i; 0, z) as an array of shape z.shape[:-1 or :] + (len(s),)."""
        if self.d == 1:
            return self.kernel.density(s, z[..., None])
        return self.kernel.density(s, z[..., None, :])

    def _log_brownian_on_nodes(self, s, z):
        r2 = z * z if self.d == 1 else np.sum(z * z, axis=-1)
        return -0.5 * self.d * np.log(4.0 * math.pi * s) - r2[..., None] / (4.0 * s)


def _as_result(out):
    return out if np.ndim(out) else float(out)


def p_reset(model: ResetModel, t: float, x, y, J: int | None = None):
    """p(t; x, y) by the level series, vectorised over broadcast x and y.

    Level j uses the shifted kernel p_0(tu; 0, y - c^j x); once c^j |x| drops
    below 1e-14 the remaining levels are merged into the x = 0 kernel.
    ``J`` overrides the truncation index (useful to keep finite differences
    on a single quadrature grid).
    """
    t = _check_t(t)
    if t == 0:
        raise ValueError("t must be positive")
    x, y = model._points(x, y)
    u, W = model._levels(t, J)
    s = t * u
    xs = np.abs(x) if model.d == 1 else np.linalg.norm(x, axis=-1)
    xmax = float(np.max(xs)) if xs.size else 0.0
    nlev = W.shape[0]
    if xmax == 0.0:
        jcut = 0
    else:
        jcut = min(nlev, max(0, math.ceil(math.log(_SHIFT_TOL / xmax) / math.log(model.c))))
    out = math.exp(-t) * model.kernel.density(t, y - x)
    for j in range(1, jcut + 1):
        z = y - model.c**j * x
        out = out + model._kernel_on_nodes(s, z) @ W[j - 1]
    if jcut < nlev:
        rest = W[jcut:].sum(axis=0)
        z = np.broadcast_to(y, np.broadcast_shapes(np.shape(x), np.shape(y)))
        out = out + model._kernel_on_nodes(s, np.asarray(z)) @ rest
    return _as_result(np.maximum(out, 0.0))


def p_reset_origin(model: ResetModel, t: float, y):
    """p(t; 0, y) = e^{-t} p_0(t; 0, y) + e^{-t} int_0^1 p_0(tu; 0, y) Phi(t, u) du.

    Phi(t, u) = t phi(t(1-u)) is used in closed form on [m, 1] and as the spline
    sum below m. Brownian kernels are summed in log space so that far tails
    do not underflow term by term.
    """
    t = _check_t(t)
    if t == 0:
        raise ValueError("t must be positive")
    y = np.asarray(y, dtype=float)
    u, lw = model._origin_weights(t)
    s = t * u
    if isinstance(model.kernel, Brownian):
        r2 = y * y if model.d == 1 else np.sum(y * y, axis=-1)
        atom = -t - 0.5 * model.d * math.log(4.0 * math.pi * t) - r2 / (4.0 * t)
        logs = model._log_brownian_on_nodes(s, y) + lw - t
        both = np.concatenate([logs, np.asarray(atom)[..., None]], axis=-1)
        return _as_result(np.exp(special.logsumexp(both, axis=-1)))
    dens = model._kernel_on_nodes(s, y)
    out = math.exp(-t) * model.kernel.density(t, y)
    shift = lw.max()
    out = out + (dens @ np.exp(lw - shift)) * math.exp(shift - t)
    return _as_result(out)


def p_reset_log_origin(model: ResetModel, t: float, y):
    """log p(t; 0, y) for Brownian kernels (no underflow for far tails)."""
    if not isinstance(model.kernel, Brownian):
        raise KernelError("log-space evaluation is implemented for Brownian kernels")
    t = _check_t(t)
    y = np.asarray(y, dtype=float)
    u, lw = model._origin_weights(t)
    s = t * u
    r2 = y * y if model.d == 1 else np.sum(y * y, axis=-1)
    atom = -t - 0.5 * model.d * math.log(4.0 * math.pi * t) - r2 / (4.0 * t)
    logs = model._log_brownian_on_nodes(s, y) + lw - t
    both = np.concatenate([logs, np.asarray(atom)[..., None]], axis=-1)
    return _as_result(special.logsumexp(both, axis=-1))


_XM, _WM = leggauss(40)


def p_reset_mixture(model: ResetModel, t: float, y):
    """p(t; 0, y) = int p_0(s; 0, y) mu_t(ds) with mu_t written in s.

    Independent of the spline grid: composite 40-point Gauss-Legendre with two
    panels per breakpoint piece [t m^{k+1}, t m^k] and six on [t m, t].
    """
    t = _check_t(t)
    if t == 0:
        raise ValueError("t must be positive")
    fam, J = _family_for(model.m, t, model.family)
    m = model.m
    kmax = max(fam.n_pieces(j) for j in range(1, J + 1))
    edges = list(np.linspace(t * m, t, 7))
    for k in range(1, kmax + 1):
        lo, hi = t * m ** (k + 1), t * m**k
        edges.extend([lo, 0.5 * (lo + hi)])
    edges = np.unique(np.array(edges))
    a, b = edges[:-1], edges[1:]
    s = (0.5 * (b - a)[:, None] * (_XM + 1.0) + a[:, None]).ravel()
    w = (0.5 * (b - a)[:, None] * _WM).ravel()
    dens = mu_t_density(s, t, m, fam)
    y = np.asarray(y, dtype=float)
    out = math.exp(-t) * model.kernel.density(t, y) + model._kernel_on_nodes(s, y) @ (w * dens)
    return _as_result(out)


# -- stationary density --------------------------------------------------------------

_XR, _WR = leggauss(32)


def _mixture_nodes(m: float):
    """Nodes and weights of int f(u) mu(du) on octaves 2^-60 .. 2^10."""
    e = np.arange(-60, 10)
    a, b = 2.0**e, 2.0 ** (e + 1)
    u = (0.5 * (b - a)[:, None] * (_XR + 1.0) + a[:, None]).ravel()
    w = (0.5 * (b - a)[:, None] * _WR).ravel()
    dens = mu_density(u, m)
    keep = dens > 0
    return u[keep], w[keep] * dens[keep]


def _rho_mixture(model: ResetModel, y):
    u, w = _mixture_nodes(model.m)
    y = np.asarray(y, dtype=float)
    return model._kernel_on_nodes(u, y) @ w


def _brownian_resolvent(beta: float, y, d: int):
    """int_0^inf e^{-beta u} p_0(u; 0, y) du = (2 pi)^{-d/2} (sqrt(beta)/r)^{d/2-1} K_{d/2-1}(sqrt(beta) r)."""
    r = np.abs(y) if d == 1 else np.linalg.norm(y, axis=-1)
    sb = math.sqrt(beta)
    if d == 1:
        return np.exp(-sb * r) / (2.0 * sb)
    nu = 0.5 * d - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (2.0 * math.pi) ** (-0.5 * d) * (sb / r) ** nu * special.kv(nu, sb * r)
    return np.where(r > 0, val, np.inf)


def _numeric_resolvent(model: ResetModel, beta: float, y):
    e = np.arange(-60, 12)
    a, b = 2.0**e, 2.0 ** (e + 1)
    u = (0.5 * (b - a)[:, None] * (_XR + 1.0) + a[:, None]).ravel()
    w = (0.5 * (b - a)[:, None] * _WR).ravel() * np.exp(-beta * u)
    keep = w > 0
    return model._kernel_on_nodes(u[keep], np.asarray(y, dtype=float)) @ w[keep]


def rho(model: ResetModel, y, method: str = "auto", return_error: bool = False):
    """Stationary density rho(y).

    ``mixture``: int p_0(u; 0, y) mu(du) by octave-panel quadrature.
    ``resolvent_series``: sum_k (-1)^k m^{k(k-1)/2}/((m;m)_k (m;m)_inf) U^{(m^-k)}(y)
    with the Bessel-K resolvent for Brownian kernels and quadrature otherwise.
    ``auto`` picks the series for Brownian kernels and the mixture elsewhere.
    If the series loses more than six digits to cancellation the mixture
    value is returned and a ResolventFallbackWarning is issued.
    With ``return_error`` the series also returns |last term kept|, which
    bounds the first omitted term of this alternating series; the bound is
    not claimed to be sharp.
    """
    if method == "auto":
        method = "resolvent_series" if isinstance(model.kernel, Brownian) else "mixture"
    y = np.asarray(y, dtype=float)
    if model.kernel.one_sided and np.any(y <= 0):
        pos = rho(model, np.where(y > 0, y, 1.0), method, return_error)
        if return_error:
            return _as_result(np.where(y > 0, pos[0], 0.0)), _as_result(np.where(y > 0, pos[1], 0.0))
        return _as_result(np.where(y > 0, pos, 0.0))
    if method == "mixture":
        if return_error:
            raise ValueError("error estimates are reported for the resolvent series only")
        return _as_result(_rho_mixture(model, y))
    if method != "resolvent_series":
        raise ValueError(f"unknown method {method!r}")
    rate, coef = _mu_coefficients(model.m)
    total = 0.0
    absum = 0.0
    for k in range(len(rate)):
        if isinstance(model.kernel, Brownian):
            U = _brownian_resolvent(rate[k], y, model.d)
        else:
            U = _numeric_resolvent(model, rate[k], y)
        term = coef[k] * U
        total = total + term
        absum = absum + np.abs(term)
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(total != 0, absum / np.abs(total), np.inf)
    bad = ratio > _CANCEL_LIMIT
    if np.any(bad):
        warnings.warn("resolvent series cancellation; using the mixture value", ResolventFallbackWarning)
        fallback = _rho_mixture(model, y)
        total = np.where(bad, fallback, total)
    if return_error:
        return _as_result(total), _as_result(np.abs(term))
    return _as_result(total)


def rho_moment(model: ResetModel, gamma: float) -> float:
    """int |y|^gamma rho(y) dy = Gamma(g+1)/Gamma_m(g+1) (1-m)^{-g} E|Y_1|^gamma, g = gamma/alpha."""
    if isinstance(model.kernel, Cylindrical):
        raise KernelError("absolute moments are not implemented for cylindrical kernels")
    g = gamma / model.kernel.alpha
    ey = model.kernel.abs_moment(gamma)
    return gamma_ratio(g, model.m) * (1.0 - model.m) ** (-g) * ey


# -- generator and Fokker-Planck ---------------------------------------------------


def generator_apply(model: ResetModel, f, x, df=None, d2f=None) -> float:
    """A f(x) = L f(x) + f(c x) - f(x).

    ``d2f`` is f'' (or the Laplacian for d > 1) and is required for Brownian
    kernels; stable kernels use principal-value quadrature of the jump part.
    """
    x = np.asarray(x, dtype=float) if model.d > 1 else float(x)
    lf = model.kernel.generator(f, x, df=df, d2f=d2f)
    return float(lf + f(model.c * x) - f(x))


@dataclass(frozen=True)
class FPResidual:
    residual: float
    fd_error_estimate: float
    roundoff_estimate: float
    h: float
    form: str


def fokker_planck_residual(model: ResetModel, t: float, x: float, y: float, h: float, form: str = "forward"):
    """Residual of the forward (in x) or adjoint (in y) Kolmogorov equation.

    forward: |d_t p - (d_xx p + p(t; cx, y) - p(t; x, y))|
    adjoint: |d_t p - (d_yy p + (1/c) p(t; x, y/c) - p(t; x, y))|
    Central differences of step h; the error estimate compares steps h and
    h/2 (second order, so it is about 4/3 of their difference).
    """
    if not isinstance(model.kernel, Brownian) or model.d != 1:
        raise KernelError("the Fokker-Planck residual is implemented for one-dimensional Brownian kernels")
    if not (1e-6 <= h <= 1e-2):
        raise FDStepError(f"step h={h} outside [1e-6, 1e-2]")
    if form not in ("forward", "adjoint"):
        raise ValueError("form must be 'forward' or 'adjoint'")
    _, J = _family_for(model.m, t + h, model.family)
    c = model.c

    def p(tt, xx, yy):
        return p_reset(model, tt, xx, yy, J=J)

    def resid(hh):
        dt = (p(t + hh, x, y) - p(t - hh, x, y)) / (2.0 * hh)
        if form == "forward":
            dxx = (p(t, x + hh, y) - 2.0 * p(t, x, y) + p(t, x - hh, y)) / hh**2
            reset = p(t, c * x, y) - p(t, x, y)
        else:
            dxx = (p(t, x, y + hh) - 2.0 * p(t, x, y) + p(t, x, y - hh)) / hh**2
            reset = p(t, x, y / c) / c - p(t, x, y)
        return dt - dxx - reset

    r1 = resid(h)
    r2 = resid(0.5 * h)
    p_mid = p(t, x, y)
    roundoff = 4.0 * np.finfo(float).eps * abs(p_mid) / h**2
    if roundoff > abs(r1) and roundoff > 1e-8:
        raise FDStepError(f"step h={h} is dominated by roundoff ({roundoff:.1e})")
    return FPResidual(abs(r1), 4.0 / 3.0 * abs(r1 - r2), roundoff, h, form)
