"""The spline family P_n and its moments.

P_1 = 1/(1-m) on (m, 1] and

    P_{n+1}(u) = (u - m^{n+1})_+^n  int_u^1 P_n(v) / (v - m^{n+1})^{n+1} dv.

P_n lives on [m^n, 1] with breakpoints at the powers m^k. On [m, 1] it has the
closed form (1-u)^{n-1} / ((n-1)! (m;m)_n); below m every breakpoint piece
[m^{k+1}, m^k] carries a Chebyshev proxy.

Internally the family stores the normalised splines

    Q_n(u) = (n-1)! (m;m)_n P_n(u),   0 <= Q_n(u) <= (1-u)^{n-1},

so deep levels never overflow or underflow, and the recursion becomes

    Q_{n+1}(u) = n (1 - m^{n+1}) int_u^1 ((u-a)/(v-a))^n Q_n(v) dv/(v-a),

with a = m^{n+1}. Substituting v = a + (u-a) e^x turns every piece integral
into int e^{-n x} Q_n(v(x)) dx over a bounded x-range, which Gauss-Legendre
handles to full precision.
"""
from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial.legendre import leggauss

from .qspecial import _check_q, q_pochhammer, qfactor

__all__ = [
    "SplineFamily",
    "SplineBuildError",
    "SplineRangeError",
    "build_family",
    "get_family",
    "eval_P",
    "eval_W",
    "moment_A",
    "scaled_moment_B",
    "MAX_LEVEL",
]

MAX_LEVEL = 500
CACHE_FORMAT_VERSION = 1
_GL_ORDER = 64
_FLUSH = 1e-300
_NEGLIGIBLE = 1e-40
_FIT_TOL = 1e-12


class SplineBuildError(ArithmeticError):
    """A piece of some level could not be resolved to the target accuracy."""


class SplineRangeError(IndexError):
    """A level outside the built range was requested."""


@dataclass
class SplineFamily:
    """Evaluable representation of P_1..P_max_n for one value of m.

    ``coefs[n]`` holds an array of shape (K_n, degree+1): Chebyshev
    coefficients of Q_n on the pieces k = 1..K_n, piece k being
    [m^{k+1}, m^k]. Pieces deeper than K_n are zero to double precision.
    """

    m: float
    degree: int
    coefs: list = field(default_factory=list)
    log_norm: list = field(default_factory=list)
    fit_error: list = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _grid_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def max_n(self) -> int:
        return max(len(self.coefs) - 1, 0)

    def n_pieces(self, n: int) -> int:
        self._check_level(n)
        return self.coefs[n].shape[0]

    def _check_level(self, n: int) -> None:
        if not (1 <= n <= self.max_n):
            raise SplineRangeError(f"level {n} outside built range 1..{self.max_n}")

    def piece_bounds(self, k: int) -> tuple[float, float]:
        """Endpoints of breakpoint piece k (k=0 is [m, 1])."""
        if k == 0:
            return self.m, 1.0
        return self.m ** (k + 1), self.m**k

    def eval_Q(self, n: int, u) -> np.ndarray:
        """Normalised spline Q_n(u) = (n-1)! (m;m)_n P_n(u), vectorised."""
        self._check_level(n)
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        top = (u >= self.m) & (u <= 1.0)
        if n == 1:
            out[top & (u > self.m)] = 1.0
            return out
        out[top] = (1.0 - u[top]) ** (n - 1)
        coef = self.coefs[n]
        if coef.shape[0] == 0:
            return out
        lm = math.log(self.m)
        low = (u > 0.0) & (u < self.m)
        if not np.any(low):
            return out
        ul = u[low]
        k = np.ceil(np.log(ul) / lm).astype(int) - 1
        k = np.clip(k, 1, None)
        vals = np.zeros(ul.shape)
        for kk in np.unique(k):
            if kk > coef.shape[0]:
                continue
            sel = k == kk
            lo, hi = self.m ** (kk + 1), self.m**kk
            x = (2.0 * ul[sel] - lo - hi) / (hi - lo)
            vals[sel] = C.chebval(x, coef[kk - 1])
        # the support of P_n starts at m^n
        vals[ul < self.m**n] = 0.0
        out[low] = vals
        return out

    def eval_P(self, n: int, u) -> np.ndarray:
        return self.eval_Q(n, u) * math.exp(-self.log_norm[n])

    def grid(self, n_max: int, order: int = 64, top_panels: int = 4):
        """Quadrature grid on (0, 1] adapted to the breakpoints.

        Returns (u, w, Q) with Gauss-Legendre nodes u, weights w and the matrix
        Q[j-1, i] = Q_j(u_i) for j = 1..n_max. Cached per (n_max, order).
        """
        key = (n_max, order, top_panels)
        with self._lock:
            hit = self._grid_cache.get(key)
        if hit is not None:
            return hit
        self._check_level(n_max)
        kmax = max(self.coefs[j].shape[0] for j in range(1, n_max + 1))
        x, wx = leggauss(order)
        us, ws = [], []
        edges = np.linspace(self.m, 1.0, top_panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            us.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
            ws.append(0.5 * (hi - lo) * wx)
        for k in range(1, kmax + 1):
            lo, hi = self.piece_bounds(k)
            us.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
            ws.append(0.5 * (hi - lo) * wx)
        u = np.concatenate(us)
        w = np.concatenate(ws)
        Q = np.empty((n_max, u.size))
        for j in range(1, n_max + 1):
            Q[j - 1] = self.eval_Q(j, u)
        u.setflags(write=False)
        w.setflags(write=False)
        Q.setflags(write=False)
        out = (u, w, Q)
        with self._lock:
            self._grid_cache[key] = out
        return out

    # -- construction -------------------------------------------------

    def _extend_to(self, max_n: int) -> None:
        if max_n > MAX_LEVEL:
            raise SplineRangeError(f"max_n={max_n} exceeds the supported {MAX_LEVEL}")
        while self.max_n < max_n:
            self._add_level()

    def _add_level(self) -> None:
        m, deg = self.m, self.degree
        n = self.max_n
        if n == 0:
            self.coefs.append(np.zeros((0, deg + 1)))  # index 0 unused
            self.log_norm.append(0.0)
            self.fit_error.append(0.0)
            self.coefs.append(np.zeros((0, deg + 1)))
            self.log_norm.append(math.log1p(-m))
            self.fit_error.append(0.0)
            return
        a = m ** (n + 1)
        scale = n * (1.0 - m ** (n + 1))
        xg, wg = leggauss(_GL_ORDER)
        xg = 0.5 * (xg + 1.0)
        wg = 0.5 * wg
        coef_n = self.coefs[n]
        kn = coef_n.shape[0]

        def q_piece(k, v):
            if k == 0:
                return np.where(v <= 1.0, (1.0 - np.minimum(v, 1.0)) ** (n - 1), 0.0)
            lo, hi = m ** (k + 1), m**k
            return C.chebval((2.0 * v - lo - hi) / (hi - lo), coef_n[k - 1])

        # full-piece integrals int_lo^hi ((lo-a)/(v-a))^n Q_n(v) dv/(v-a)
        full = np.zeros(kn + 1)
        for i in range(kn + 1):
            lo, hi = self.piece_bounds(i)
            X = math.log((hi - a) / (lo - a))
            xx = X * xg
            v = a + (lo - a) * np.exp(xx)
            full[i] = X * np.sum(wg * np.exp(-n * xx) * q_piece(i, v))
        log_lo = np.array([math.log(self.piece_bounds(i)[0] - a) for i in range(kn + 1)])

        npts = deg + 1
        xc = C.chebpts1(npts)
        vander = C.chebvander(xc, deg)
        kcand = min(n, kn + 1)
        new = []
        level_max = 0.0
        small_run = 0
        errs = []
        for k in range(1, kcand + 1):
            lo, hi = m ** (k + 1), m**k
            u = 0.5 * (hi - lo) * xc + 0.5 * (hi + lo)
            lu = np.log(u - a)
            # contributions of the pieces above k
            expo = n * (lu[:, None] - log_lo[None, :k])
            acc = np.exp(expo) @ full[:k]
            if k <= kn:
                X = np.log((hi - a) / (u - a))
                xx = X[:, None] * xg[None, :]
                v = a + (u - a)[:, None] * np.exp(xx)
                acc += X * ((np.exp(-n * xx) * q_piece(k, v)) @ wg)
            vals = scale * acc
            vals[np.abs(vals) < _FLUSH] = 0.0
            cf = vander.T @ vals / npts
            cf[1:] *= 2.0
            peak = float(np.max(np.abs(vals)))
            level_max = max(level_max, peak)
            errs.append((k, peak, float(np.max(np.abs(cf[-3:])))))
            new.append(cf)
            if peak < _NEGLIGIBLE * level_max:
                small_run += 1
                if small_run >= 2:
                    new = new[:-2]
                    errs = errs[:-2]
                    break
            else:
                small_run = 0
        worst = 0.0
        for k, peak, tail in errs:
            if level_max > 0 and peak > 1e-25 * level_max:
                rel = tail / peak if peak > 0 else 0.0
                if rel > _FIT_TOL:
                    raise SplineBuildError(
                        f"level {n + 1}, piece [m^{k + 1}, m^{k}]: Chebyshev tail {rel:.2e} "
                        f"exceeds {_FIT_TOL:.0e}"
                    )
                worst = max(worst, rel)
        arr = np.array(new) if new else np.zeros((0, deg + 1))
        arr.setflags(write=False)
        self.coefs.append(arr)
        self.log_norm.append(math.lgamma(n + 1) + math.log(q_pochhammer(m, m, n + 1)))
        self.fit_error.append(worst)

    # -- disk cache -----------------------------------------------------

    def to_bytes(self) -> bytes:
        head = [CACHE_FORMAT_VERSION, self.m, self.max_n, self.degree]
        parts = [np.array(head, dtype="<f8")]
        for n in range(1, self.max_n + 1):
            parts.append(np.array([self.coefs[n].shape[0], self.fit_error[n]], dtype="<f8"))
            parts.append(np.asarray(self.coefs[n], dtype="<f8").ravel())
        return np.concatenate(parts).tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "SplineFamily":
        data = np.frombuffer(raw, dtype="<f8")
        version, m, max_n, degree = data[:4]
        if int(version) != CACHE_FORMAT_VERSION:
            raise ValueError("unsupported spline cache version")
        degree = int(degree)
        fam = cls(m=float(m), degree=degree)
        fam.coefs = [np.zeros((0, degree + 1))]
        fam.log_norm = [0.0]
        fam.fit_error = [0.0]
        pos = 4
        for n in range(1, int(max_n) + 1):
            kn = int(data[pos])
            fam.fit_error.append(float(data[pos + 1]))
            pos += 2
            arr = data[pos : pos + kn * (degree + 1)].reshape(kn, degree + 1).copy()
            arr.setflags(write=False)
            pos += kn * (degree + 1)
            fam.coefs.append(arr)
            fam.log_norm.append(math.lgamma(n) + math.log(q_pochhammer(fam.m, fam.m, n)))
        return fam


def _cache_path(m: float, max_n: int, degree: int) -> Path | None:
    root = os.environ.get("RESET_KERNELS_CACHE")
    if not root:
        return None
    name = f"splines_v{CACHE_FORMAT_VERSION}_m{float(m).hex()}_n{max_n}_d{degree}.bin"
    return Path(root) / name


def build_family(m: float, max_n: int = 40, proxy_degree: int = 64) -> SplineFamily:
    """Build P_1..P_max_n from scratch (or load them from the disk cache)."""
    m = _check_q(m)
    if max_n < 1:
        raise ValueError("max_n must be positive")
    if max_n > MAX_LEVEL:
        raise SplineRangeError(f"max_n={max_n} exceeds the supported {MAX_LEVEL}")
    if proxy_degree < 16:
        raise ValueError("proxy_degree must be at least 16")
    path = _cache_path(m, max_n, proxy_degree)
    if path is not None and path.exists():
        return SplineFamily.from_bytes(path.read_bytes())
    fam = SplineFamily(m=m, degree=proxy_degree)
    fam._extend_to(max_n)
    _save(fam, path)
    return fam


def _save(fam: SplineFamily, path: Path | None) -> None:
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(fam.to_bytes())
    tmp.replace(path)


_REGISTRY: dict = {}
_REGISTRY_LOCK = threading.Lock()


def get_family(m: float, min_n: int, proxy_degree: int = 64) -> SplineFamily:
    """Shared family for ``m`` holding at least ``min_n`` levels.

    Families are grown in steps of 20 levels so that repeated requests reuse
    the same disk cache entries.
    """
    m = _check_q(m)
    want = max(40, 20 * math.ceil(min_n / 20))
    key = (m, proxy_degree)
    with _REGISTRY_LOCK:
        fam = _REGISTRY.get(key)
        if fam is None or fam.max_n < min_n:
            want = min(want, MAX_LEVEL)
            path = _cache_path(m, want, proxy_degree)
            if fam is None or (path is not None and path.exists()):
                fam = build_family(m, want, proxy_degree)
            else:
                # levels are only appended, so holders of the object stay valid
                fam._extend_to(want)
                _save(fam, path)
            _REGISTRY[key] = fam
    return fam


def eval_P(family: SplineFamily, n: int, u):
    """P_n(u): closed form on [m, 1], proxy below m, zero off [m^n, 1]."""
    out = family.eval_P(n, u)
    return out if np.ndim(u) else float(out)


def eval_W(family: SplineFamily, n: int, t: float, u):
    """W_n(t, u) = t^{n-1} P_n(u/t)."""
    if t <= 0:
        raise ValueError("t must be positive")
    out = t ** (n - 1) * family.eval_P(n, np.asarray(u, dtype=float) / t)
    return out if np.ndim(u) else float(out)


def moment_A(gamma: float, n: int, m: float) -> float:
    """int_0^1 u^gamma P_n(u) du = prod_{k<=n} (1 - m^{k+gamma})/(k+gamma) / (m;m)_n."""
    m = _check_q(m)
    ks = np.arange(1, n + 1, dtype=float)
    f = qfactor(ks + gamma, m)
    return float(np.prod(f) / q_pochhammer(m, m, n))


def scaled_moment_B(gamma: float, n: int, m: float) -> float:
    """B(gamma, n) = prod_k (k+gamma)/(1 - m^{k+gamma}) * A(gamma, n); equals 1/(m;m)_n."""
    m = _check_q(m)
    ks = np.arange(1, n + 1, dtype=float)
    f = qfactor(ks + gamma, m)
    return float(moment_A(gamma, n, m) / np.prod(f))
