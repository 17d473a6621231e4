"""Transition densities p_0 and Levy densities nu of strictly stable processes.

Conventions: the symmetric stable kernels have characteristic exponent
Psi(z) = |z|^alpha, the subordinators have Laplace exponent u^alpha and the
Brownian kernel has generator Delta (variance 2t per coordinate).

Every kernel is evaluated at unit time and rescaled with

    p_0(s; 0, z) = s^{-d/alpha} p_0(1; 0, s^{-1/alpha} z).
"""
from __future__ import annotations

import math
import threading
import warnings
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

__all__ = [
    "KernelError",
    "InversionError",
    "KernelModel",
    "Brownian",
    "SymmetricStable1D",
    "SubordinatorHalf",
    "SubordinatorGeneral",
    "Cauchy1D",
    "Cylindrical",
    "p0",
    "levy_density",
    "stable_density_inversion",
    "stable_tail_series",
    "isotropic_levy_constant",
]


class KernelError(ValueError):
    """Invalid kernel parameters or an unsupported operation."""


class InversionError(ArithmeticError):
    """Numerical inversion failed to reach the requested accuracy."""


# -- unit-time stable densities ---------------------------------------------------

_XG, _WG = leggauss(24)


def stable_tail_series(alpha: float, z, kind: str, nterms: int | None = None):
    """Large-argument series of the unit-time density and its last-term size.

    symmetric:    (1/pi) sum_k (-1)^{k+1} Gamma(alpha k+1)/k! sin(pi alpha k/2) z^{-alpha k-1}
    subordinator: (1/pi) sum_k (-1)^{k+1} Gamma(alpha k+1)/k! sin(pi alpha k)   z^{-alpha k-1}

    Convergent for alpha < 1, asymptotic for alpha > 1. Without ``nterms`` the
    sum stops at the smallest term or once terms fall below 1e-17 relative.
    Returns (value, error_estimate) for scalar z.
    """
    z = float(abs(z)) if kind == "symmetric" else float(z)
    if z <= 0:
        raise KernelError("tail series needs z > 0")
    freq = 0.5 if kind == "symmetric" else 1.0
    lz = math.log(z)
    total = 0.0
    prev = math.inf
    last = 0.0
    biggest = 0.0
    kmax = nterms if nterms is not None else 400
    for k in range(1, kmax + 1):
        s = math.sin(math.pi * alpha * k * freq)
        lmag = math.lgamma(alpha * k + 1.0) - math.lgamma(k + 1.0) - (alpha * k + 1.0) * lz
        if lmag > 700:
            return math.nan, math.inf
        mag = math.exp(lmag)
        biggest = max(biggest, abs(s) * mag)
        if nterms is None and mag > prev and alpha > 1:
            break
        term = (-1) ** (k + 1) * s * mag
        total += term
        last = abs(mag)
        prev = mag
        if nterms is None and mag < 1e-17 * abs(total):
            break
    # truncation plus cancellation error
    return total / math.pi, (last + 4e-16 * biggest) / math.pi


def _symmetric_fourier(alpha: float, z: float) -> float:
    """(1/pi) int_0^inf cos(z w) e^{-w^alpha} dw by panels between zeros of cos."""
    if z == 0:
        return math.gamma(1.0 + 1.0 / alpha) / math.pi
    z = abs(z)
    wmax = 46.0 ** (1.0 / alpha)
    h = math.pi / z
    first = min(0.5 * h, wmax)
    # the first panel carries the cusp of e^{-w^alpha} at w = 0
    with warnings.catch_warnings():
        # roundoff warnings are expected at this tolerance; err0 is checked below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v0, err0 = integrate.quad(
            lambda w: math.cos(z * w) * math.exp(-(w**alpha)),
            0.0,
            first,
            epsabs=1e-17,
            epsrel=1e-14,
            limit=400,
        )
    if err0 > 1e-11:
        raise InversionError(f"first panel did not converge (alpha={alpha}, z={z}, err={err0:.1e})")
    if first >= wmax:
        return v0 / math.pi
    npan = int(math.ceil((wmax - first) / h))
    if npan > 5_000_000:
        raise InversionError(f"too many panels for alpha={alpha}, z={z}")
    total = v0
    chunk = 200_000
    for start in range(0, npan, chunk):
        a = first + h * np.arange(start, min(npan, start + chunk))
        w = a[:, None] + 0.5 * h * (_XG[None, :] + 1.0)
        vals = np.cos(z * w) * np.exp(-(w**alpha))
        total += math.fsum(0.5 * h * (vals @ _WG))
    return total / math.pi


def _kanter_log(alpha: float, x: float) -> float:
    """log of the unit-time one-sided stable density at x > 0 (Laplace e^{-u^alpha}).

    The Bromwich integral, deformed onto its steepest-descent path, becomes

        f(x) = alpha/((1-alpha) pi) x^{-1/(1-alpha)} int_0^pi A(th) exp(-x^{-alpha/(1-alpha)} A(th)) dth,
        A(th) = (sin(alpha th)/sin th)^{1/(1-alpha)} sin((1-alpha) th)/sin(alpha th),

    evaluated here in log form so that tiny values do not underflow.
    """
    a = alpha
    p = 1.0 / (1.0 - a)

    def A(th):
        if th < 1e-8:
            return a ** (a * p) * (1.0 - a)
        return (math.sin(a * th) / math.sin(th)) ** p * math.sin((1.0 - a) * th) / math.sin(a * th)

    lam = x ** (-a * p)
    a0 = A(0.0)
    pts = [1e-3, 1e-2, 0.1, 0.5, 1.5, 2.5, 3.0]
    val, err = integrate.quad(
        lambda th: A(th) * math.exp(-lam * (A(th) - a0)),
        0.0,
        math.pi,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
        points=pts,
    )
    if not (val > 0) or err > 1e-9 * val:
        raise InversionError(f"Bromwich integral did not converge (alpha={alpha}, x={x})")
    return math.log(a * p / math.pi) - p * math.log(x) - lam * a0 + math.log(val)


def stable_density_inversion(alpha: float, t: float, z: float, kind: str = "symmetric") -> float:
    """Density at z of the strictly stable law with exponent alpha at time t.

    ``kind='symmetric'``: inverse Fourier transform of e^{-t|w|^alpha}.
    ``kind='subordinator'``: inverse Laplace transform of e^{-t u^alpha}.
    The tail series takes over once its error estimate drops below 1e-15
    relative.
    """
    if t <= 0:
        raise KernelError("t must be positive")
    if kind == "symmetric":
        if not (0 < alpha <= 2):
            raise KernelError("symmetric kernels need 0 < alpha <= 2")
    elif kind == "subordinator":
        if not (0 < alpha < 1):
            raise KernelError("subordinators need 0 < alpha < 1")
    else:
        raise KernelError(f"unknown kind {kind!r}")
    scale = t ** (-1.0 / alpha)
    x = z * scale
    if kind == "symmetric":
        x = abs(x)
        if x > 0 and alpha < 2:
            val, err = stable_tail_series(alpha, x, "symmetric")
            if err < 1e-15 * abs(val) and val > 0:
                return scale * val
        return scale * _symmetric_fourier(alpha, x)
    if x <= 0:
        return 0.0
    val, err = stable_tail_series(alpha, x, "subordinator")
    if err < 1e-15 * abs(val) and val > 0:
        return scale * val
    lg = _kanter_log(alpha, x)
    return scale * math.exp(lg) if lg > -745 else 0.0


class _LogTable:
    """Piecewise Chebyshev interpolant of a unit-time stable density.

    Pieces are octaves [2^i, 2^{i+1}] in log-argument, each carrying the
    logarithm of the density; a plain Chebyshev piece covers [0, 1] for the
    symmetric case; the tail series is used beyond the last piece.
    """

    DEG = 32

    def __init__(self, alpha: float, kind: str):
        self.alpha = alpha
        self.kind = kind
        xc = C.chebpts1(self.DEG + 1)
        self._xc = xc
        self._vander = C.chebvander(xc, self.DEG)
        # where the tail series is accurate enough
        i = -4 if kind == "subordinator" else 0
        while True:
            z = 2.0**i
            val, err = stable_tail_series(alpha, z, kind)
            if val > 0 and err < 1e-15 * val:
                break
            i += 1
            if i > 60:
                raise InversionError("tail series never converges")
        self.hi_exp = max(i, -30)
        self.tail_terms = self._count_terms(2.0**i)
        self._tail_cf = self._tail_coefficients()
        if kind == "symmetric":
            self.core, self.lo_exp = self._fit_core()
        else:
            self.core = None
            i = min(i, 0)
            while _kanter_log(alpha, 2.0**i) > -700:
                i -= 1
            self.lo_exp = i
        self.pieces = []
        for e in range(self.lo_exp, self.hi_exp):
            s = math.log(2.0) * (e + 0.5 * (xc + 1.0))
            logs = np.array([self._log_direct(math.exp(v)) for v in s])
            self.pieces.append(self._fit(logs))
        self._check()

    def _fit_core(self):
        # near 0 the density is smooth but not analytic for alpha < 1, so the
        # plain Chebyshev core shrinks until it is accurate
        for c in range(0, -31, -2):
            w = 2.0**c
            zs = 0.5 * w * (self._xc + 1.0)
            vals = np.array([_symmetric_fourier(self.alpha, z) for z in zs])
            core = self._fit(vals)
            probe = w * np.array([0.013, 0.31, 0.577, 0.93])
            ref = np.array([_symmetric_fourier(self.alpha, z) for z in probe])
            got = C.chebval(2.0 * probe / w - 1.0, core)
            if np.max(np.abs(got / ref - 1.0)) < 1e-13:
                return core, c
        raise InversionError(f"no accurate core interpolant for alpha={self.alpha}")

    def _count_terms(self, z):
        n = 0
        total = 0.0
        prev = math.inf
        for k in range(1, 400):
            mag = math.exp(
                math.lgamma(self.alpha * k + 1.0) - math.lgamma(k + 1.0) - (self.alpha * k + 1.0) * math.log(z)
            )
            if mag > prev and self.alpha > 1:
                break
            total += mag
            n = k
            prev = mag
            if mag < 1e-17 * total:
                break
        return n

    def _log_direct(self, z):
        if self.kind == "subordinator":
            return _kanter_log(self.alpha, z)
        return math.log(stable_density_inversion(self.alpha, 1.0, z, self.kind))

    def _fit(self, vals):
        cf = self._vander.T @ vals / (self.DEG + 1)
        cf[1:] *= 2.0
        return cf

    def _check(self):
        # spot check at piece midpoints between interpolation nodes
        for e in range(self.lo_exp, self.hi_exp, max(1, (self.hi_exp - self.lo_exp) // 6)):
            z = 2.0 ** (e + 0.37)
            a = self._log_direct(z)
            b = C.chebval(2.0 * 0.37 - 1.0, self.pieces[e - self.lo_exp])
            if abs(a - b) > 1e-11:
                raise InversionError(f"interpolation table check failed at z={z}: {a} vs {b}")

    def _tail_coefficients(self):
        # terms rescaled to the switch point 2^hi_exp, where they are all <= O(1)
        a = self.alpha
        freq = 0.5 if self.kind == "symmetric" else 1.0
        lzh = self.hi_exp * math.log(2.0)
        cf = np.zeros(self.tail_terms + 1)
        for k in range(1, self.tail_terms + 1):
            c = (-1) ** (k + 1) * math.sin(math.pi * a * k * freq)
            if c != 0.0:
                cf[k] = c * math.exp(math.lgamma(a * k + 1.0) - math.lgamma(k + 1.0) - a * k * lzh)
        return cf

    def _tail(self, z):
        # sum_k cf_k v^k / (pi z) with v = (2^hi_exp / z)^alpha <= 1, by Horner;
        # far out fewer terms reach rounding level, so the degree is cut by tiers of v
        v = np.exp(self.alpha * (self.hi_exp * math.log(2.0) - np.log(z)))
        out = np.empty(z.shape)
        cf = self._tail_cf
        big = np.max(np.abs(cf))
        lead = abs(cf[1]) if cf[1] != 0.0 else big
        upper = 1.0
        for vmax in (1e-1, 1e-2, 1e-4, 1e-8, 0.0):
            sel = (v <= upper) & (v > vmax)
            upper = vmax
            if not np.any(sel):
                continue
            top = v[sel].max()
            n = len(cf) - 1
            if top < 1.0:
                n = min(n, max(1, math.ceil(math.log(1e-17 * lead / big) / math.log(top)) + 1))
            vs = v[sel]
            acc = np.zeros(vs.shape)
            for c in cf[n:0:-1]:
                acc = (acc + c) * vs
            out[sel] = acc
        return out / (math.pi * z)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "symmetric":
            z = np.abs(z)
        out = np.zeros(z.shape)
        lo = 2.0**self.lo_exp
        hi = 2.0**self.hi_exp
        if self.core is not None:
            sel = z <= lo
            if np.any(sel):
                out[sel] = C.chebval(2.0 * z[sel] / lo - 1.0, self.core)
        mid = (z > lo) & (z < hi)
        if np.any(mid):
            s = np.log2(z[mid])
            e = np.clip(np.floor(s).astype(int), self.lo_exp, self.hi_exp - 1)
            # group by piece with one sort instead of a mask per piece
            order = np.argsort(e, kind="stable")
            es = e[order]
            xs = 2.0 * (s[order] - es) - 1.0
            res = np.empty(s.shape)
            cuts = np.flatnonzero(np.diff(es)) + 1
            for lo_i, hi_i in zip(np.r_[0, cuts], np.r_[cuts, es.size]):
                res[order[lo_i:hi_i]] = C.chebval(xs[lo_i:hi_i], self.pieces[es[lo_i] - self.lo_exp])
            out[mid] = np.exp(res)
        big = z >= hi
        if np.any(big):
            out[big] = self._tail(z[big])
        return out


_TABLES: dict = {}
_TABLE_LOCK = threading.Lock()


def _table(alpha: float, kind: str) -> _LogTable:
    key = (float(alpha), kind)
    with _TABLE_LOCK:
        tab = _TABLES.get(key)
    if tab is None:
        tab = _LogTable(float(alpha), kind)
        with _TABLE_LOCK:
            _TABLES.setdefault(key, tab)
    return tab


def isotropic_levy_constant(alpha: float, d: int) -> float:
    """2^alpha Gamma((d+alpha)/2) / (pi^{d/2} |Gamma(-alpha/2)|)."""
    return 2.0**alpha * math.gamma(0.5 * (d + alpha)) / (math.pi ** (0.5 * d) * abs(math.gamma(-0.5 * alpha)))


# -- kernel models -------------------------------------------------------------------


class KernelModel:
    """Base class. ``density(s, z)`` is p_0(s; 0, z), vectorised and broadcasting."""

    name = "kernel"
    d = 1
    alpha = 2.0
    one_sided = False
    symmetric = True

    def density(self, s, z):
        raise NotImplementedError

    def p0(self, t, x, y):
        if np.any(np.asarray(t) <= 0):
            raise KernelError("t must be positive")
        z = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        out = self.density(np.asarray(t, dtype=float), z)
        return out if np.ndim(out) else float(out)

    def levy_density(self, y):
        raise KernelError(f"{self.name} has no Levy density")

    def abs_moment(self, gamma: float) -> float:
        """E|Y_1|^gamma."""
        raise KernelError(f"no closed-form absolute moment for {self.name}")

    def moment_window(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def generator(self, f, x, df=None, d2f=None):
        raise KernelError(f"no generator implemented for {self.name}")

    def describe(self) -> dict:
        return {"kernel": self.name, "alpha": self.alpha, "d": self.d}

    def _norm(self, z):
        z = np.asarray(z, dtype=float)
        if self.d == 1:
            return np.abs(z)
        return np.sqrt(np.sum(z * z, axis=-1))


class Brownian(KernelModel):
    """Gaussian kernel (4 pi t)^{-d/2} exp(-|y-x|^2/(4t))."""

    alpha = 2.0
    name = "brownian"

    def __init__(self, d: int = 1):
        if d < 1:
            raise KernelError("dimension must be positive")
        self.d = int(d)

    def density(self, s, z):
        s = np.asarray(s, dtype=float)
        z = np.asarray(z, dtype=float)
        r2 = z * z if self.d == 1 else np.sum(z * z, axis=-1)
        return (4.0 * math.pi * s) ** (-0.5 * self.d) * np.exp(-r2 / (4.0 * s))

    def density_r2(self, s, r2):
        """p_0 as a function of the squared distance."""
        s = np.asarray(s, dtype=float)
        return (4.0 * math.pi * s) ** (-0.5 * self.d) * np.exp(-np.asarray(r2) / (4.0 * s))

    def abs_moment(self, gamma: float) -> float:
        lo, _ = self.moment_window()
        if gamma <= lo:
            raise KernelError(f"E|Y_1|^gamma is infinite for gamma <= {lo}")
        return 2.0**gamma * math.exp(math.lgamma(0.5 * (self.d + gamma)) - math.lgamma(0.5 * self.d))

    def moment_window(self):
        return (-float(self.d), math.inf)

    def generator(self, f, x, df=None, d2f=None):
        if d2f is None:
            raise KernelError("the Brownian generator needs the Laplacian of f (pass d2f)")
        return d2f(x)


class SymmetricStable1D(KernelModel):
    """One-dimensional symmetric stable kernel with Psi(z) = |z|^alpha."""

    name = "symmetric"

    def __init__(self, alpha: float):
        if not (0 < alpha < 2):
            raise KernelError("alpha must lie in (0, 2)")
        self.alpha = float(alpha)
        self.d = 1

    @property
    def table(self):
        return _table(self.alpha, "symmetric")

    def density(self, s, z):
        s = np.asarray(s, dtype=float)
        sc = s ** (-1.0 / self.alpha)
        return sc * self.table(np.asarray(z, dtype=float) * sc)

    def levy_density(self, y):
        y = np.abs(np.asarray(y, dtype=float))
        if np.any(y == 0):
            raise KernelError("nu is singular at 0")
        out = isotropic_levy_constant(self.alpha, 1) * y ** (-1.0 - self.alpha)
        return out if out.ndim else float(out)

    def abs_moment(self, gamma: float) -> float:
        lo, hi = self.moment_window()
        if not (lo < gamma < hi):
            raise KernelError(f"E|Y_1|^gamma needs {lo} < gamma < {hi}")
        a = self.alpha
        return (
            2.0**gamma
            * math.gamma(0.5 * (1.0 + gamma))
            * math.gamma(1.0 - gamma / a)
            / (math.sqrt(math.pi) * math.gamma(1.0 - 0.5 * gamma))
        )

    def moment_window(self):
        return (-1.0, self.alpha)

    def generator(self, f, x, df=None, d2f=None):
        return _symmetric_generator(self.alpha, f, x, d2f)

    def describe(self):
        return {"kernel": self.name, "alpha": self.alpha, "d": 1}


def _symmetric_generator(alpha, f, x, d2f=None):
    """int_0^inf (f(x+z) + f(x-z) - 2 f(x)) nu(z) dz by principal-value quadrature."""
    c = isotropic_levy_constant(alpha, 1)
    fx = f(x)

    def g(z):
        return (f(x + z) + f(x - z) - 2.0 * fx) * c * z ** (-1.0 - alpha)

    eps = 1e-3
    if d2f is not None:
        curv = d2f(x)
    else:
        # central difference; the quadrature itself would only see roundoff here
        h = 2e-4
        curv = (f(x + h) + f(x - h) - 2.0 * fx) / (h * h)
    # second-order Taylor piece near the singularity
    near = curv * c * eps ** (2.0 - alpha) / (2.0 - alpha)
    mid = integrate.quad(g, eps, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    far = integrate.quad(g, 1.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    return near + mid + far


class Cauchy1D(SymmetricStable1D):
    """Cauchy kernel with drift: t / (pi ((y-x-gamma t)^2 + t^2))."""

    name = "cauchy"

    def __init__(self, drift: float = 0.0):
        self.alpha = 1.0
        self.d = 1
        self.drift = float(drift)
        self.symmetric = self.drift == 0.0

    def density(self, s, z):
        s = np.asarray(s, dtype=float)
        z = np.asarray(z, dtype=float)
        # Gamma((d+1)/2)/pi^{(d+1)/2} with d = 1 is 1/pi
        return s / (math.pi * ((z - self.drift * s) ** 2 + s * s))

    def abs_moment(self, gamma: float) -> float:
        if self.drift != 0.0:
            raise KernelError("no closed-form absolute moment for a drifted Cauchy kernel")
        return super().abs_moment(gamma)

    def generator(self, f, x, df=None, d2f=None):
        out = _symmetric_generator(1.0, f, x, d2f)
        if self.drift:
            if df is None:
                raise KernelError("the drifted Cauchy generator needs f' (pass df)")
            out += self.drift * df(x)
        return out

    def describe(self):
        return {"kernel": self.name, "alpha": 1.0, "d": 1, "drift": self.drift}


class _Subordinator(KernelModel):
    one_sided = True
    symmetric = False

    def levy_density(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0):
            raise KernelError("the subordinator Levy density lives on (0, inf)")
        a = self.alpha
        out = a / math.gamma(1.0 - a) * y ** (-1.0 - a)
        return out if out.ndim else float(out)

    def abs_moment(self, gamma: float) -> float:
        lo, hi = self.moment_window()
        if not (gamma < hi):
            raise KernelError(f"E Y_1^gamma needs gamma < {hi}")
        return math.gamma(1.0 - gamma / self.alpha) / math.gamma(1.0 - gamma)

    def moment_window(self):
        return (-math.inf, self.alpha)

    def generator(self, f, x, df=None, d2f=None):
        a = self.alpha
        c = a / math.gamma(1.0 - a)
        fx = f(x)

        def g(z):
            return (f(x + z) - fx) * c * z ** (-1.0 - a)

        near = integrate.quad(g, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        far = integrate.quad(g, 1.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
        return near + far


class SubordinatorHalf(_Subordinator):
    """1/2-stable subordinator: (4 pi)^{-1/2} t (y-x)^{-3/2} exp(-t^2/(4(y-x)))."""

    name = "subordinator_half"
    alpha = 0.5

    def __init__(self):
        self.d = 1

    def density(self, s, z):
        s = np.asarray(s, dtype=float)
        z = np.asarray(z, dtype=float)
        zp = np.where(z > 0, z, 1.0)
        val = (4.0 * math.pi) ** -0.5 * s * zp**-1.5 * np.exp(-s * s / (4.0 * zp))
        return np.where(z > 0, val, 0.0)


class SubordinatorGeneral(_Subordinator):
    """alpha-stable subordinator with Laplace exponent u^alpha, by numerical inversion."""

    name = "subordinator"

    def __init__(self, alpha: float):
        if not (0 < alpha < 1):
            raise KernelError("alpha must lie in (0, 1)")
        self.alpha = float(alpha)
        self.d = 1

    @property
    def table(self):
        return _table(self.alpha, "subordinator")

    def density(self, s, z):
        s = np.asarray(s, dtype=float)
        z = np.asarray(z, dtype=float)
        sc = s ** (-1.0 / self.alpha)
        x = z * sc
        pos = x > 0
        return np.where(pos, sc * self.table(np.where(pos, x, 1.0)), 0.0)


class Cylindrical(KernelModel):
    """Product of d independent one-dimensional symmetric alpha-stable kernels."""

    name = "cylindrical"

    def __init__(self, alpha: float, d: int = 2):
        if not (0 < alpha < 2):
            raise KernelError("alpha must lie in (0, 2)")
        if d < 1:
            raise KernelError("dimension must be positive")
        self.alpha = float(alpha)
        self.d = int(d)
        self.factor = SymmetricStable1D(alpha)

    def density(self, s, z):
        s = np.asarray(s, dtype=float)
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.d:
            raise KernelError(f"points must have trailing dimension {self.d}")
        out = np.ones(np.broadcast_shapes(s.shape, z.shape[:-1]))
        for i in range(self.d):
            out = out * self.factor.density(s, z[..., i])
        return out

    def levy_density(self, y):
        """The one-dimensional factor nu(y) of the coordinate processes."""
        return self.factor.levy_density(y)

    def generator(self, f, x, df=None, d2f=None):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for i in range(self.d):
            e = np.zeros(self.d)
            e[i] = 1.0
            total += _symmetric_generator(self.alpha, lambda s: f(x + (s - x[i]) * e), float(x[i]))
        return total


def p0(model: KernelModel, t, x, y):
    """p_0(t; x, y) of ``model``."""
    return model.p0(t, x, y)


def levy_density(model: KernelModel, y):
    """nu(y) of ``model``."""
    return model.levy_density(y)
