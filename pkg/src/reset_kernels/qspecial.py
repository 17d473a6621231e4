"""q-series special functions: q-Pochhammer symbols, q-Gamma, q-binomials.

Everything here is a pure function of real arguments. The base ``q`` (called
``m`` elsewhere in the package) must lie strictly inside (0, 1).
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "QDomainError",
    "PoleError",
    "QValue",
    "q_pochhammer",
    "log_q_pochhammer_inf",
    "q_bracket",
    "q_factorial",
    "q_gamma",
    "log_q_gamma",
    "gamma_ratio",
    "log_gamma_ratio",
    "q_binomial",
    "mittag_leffler",
    "qfactor",
]

_TAIL_TOL = 1e-17


class QDomainError(ValueError):
    """Raised when the base q is outside (0, 1) or an argument is illegal."""


class PoleError(ValueError):
    """Raised when a q-Gamma argument hits a pole (x in {0, -1, -2, ...})."""


class QValue(float):
    """A float guaranteed to lie strictly inside (0, 1)."""

    def __new__(cls, q):
        q = float(q)
        if not (0.0 < q < 1.0):
            raise QDomainError(f"q must lie in (0, 1), got {q!r}")
        return super().__new__(cls, q)


def _check_q(q) -> float:
    return float(QValue(q))


def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def q_pochhammer(a: float, q: float, n=math.inf) -> float:
    """(a; q)_n = prod_{j<n} (1 - a q^j); ``n`` may be ``math.inf``.

    The infinite product stops once the remaining tail sum |a| q^j / (1 - q)
    drops below 1e-17, which bounds the relative truncation error.
    """
    q = _check_q(q)
    a = float(a)
    if n == math.inf:
        prod = 1.0
        term = a
        while True:
            prod *= 1.0 - term
            term *= q
            if abs(term) / (1.0 - q) < _TAIL_TOL:
                return prod
    n = int(n)
    if n < 0:
        raise QDomainError("n must be non-negative")
    prod = 1.0
    term = a
    for _ in range(n):
        prod *= 1.0 - term
        term *= q
    return prod


def log_q_pochhammer_inf(a: float, q: float) -> float:
    """log (a; q)_inf for a < 1, summed as log1p terms."""
    q = _check_q(q)
    if a >= 1.0:
        raise QDomainError("log (a;q)_inf needs a < 1")
    total = 0.0
    term = float(a)
    while abs(term) / (1.0 - q) >= _TAIL_TOL:
        total += math.log1p(-term)
        term *= q
    return total


def q_bracket(x: float, q: float) -> float:
    """[x]_q = (1 - q^x)/(1 - q)."""
    q = _check_q(q)
    return -math.expm1(x * math.log(q)) / (1.0 - q)


def q_factorial(n: int, q: float) -> float:
    """[n]_q! = (q; q)_n / (1 - q)^n."""
    q = _check_q(q)
    return q_pochhammer(q, q, n) / (1.0 - q) ** n


def qfactor(x, m):
    """(1 - m^x)/x, continuously extended by log(1/m) at x = 0. Vectorised."""
    x = np.asarray(x, dtype=float)
    lm = math.log(m)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = -np.expm1(x * lm) / x
    out = np.where(x == 0.0, -lm, out)
    return out if out.ndim else float(out)


def q_gamma(q: float, x: float) -> float:
    """Gamma_q(x) = (1-q)^(1-x) (q;q)_inf / (q^x;q)_inf."""
    q = _check_q(q)
    x = float(x)
    if _is_nonpos_int(x):
        raise PoleError(f"Gamma_q has a pole at x={x}")
    return (1.0 - q) ** (1.0 - x) * q_pochhammer(q, q) / q_pochhammer(q**x, q)


def log_q_gamma(q: float, x: float) -> float:
    """log Gamma_q(x) for x > 0."""
    q = _check_q(q)
    if x <= 0:
        raise QDomainError("log_q_gamma needs x > 0")
    return (
        (1.0 - x) * math.log1p(-q)
        + log_q_pochhammer_inf(q, q)
        - log_q_pochhammer_inf(q**x, q)
    )


def log_gamma_ratio(gamma: float, m: float) -> tuple[float, float]:
    """Return (sign, log|Gamma(gamma+1)/Gamma_m(gamma+1)|)."""
    m = _check_q(m)
    gamma = float(gamma)
    n_shift = max(0, math.ceil(-gamma))
    sign = 1.0
    log_abs = 0.0
    for k in range(1, n_shift + 1):
        f = qfactor(gamma + k, m) / (1.0 - m)
        if f < 0:
            sign = -sign
        log_abs += math.log(abs(f))
    g = gamma + n_shift
    # g >= 0 here, so both Gamma functions are finite and positive
    log_abs += math.lgamma(g + 1.0) - log_q_gamma(m, g + 1.0)
    return sign, log_abs


def gamma_ratio(gamma: float, m: float) -> float:
    """Gamma(gamma+1)/Gamma_m(gamma+1), continuous on the whole real line.

    For gamma <= -1 the ratio is pushed up by the recurrence of both Gamma
    functions; the factor (1 - m^x)/x is replaced by log(1/m) when x = 0, which
    is exactly the limiting value at negative integers.
    """
    sign, log_abs = log_gamma_ratio(gamma, m)
    return sign * math.exp(log_abs)


def q_binomial(n: float, k: float, q: float) -> float:
    """Gamma_q(n+1) / (Gamma_q(k+1) Gamma_q(n-k+1))."""
    q = _check_q(q)
    for x in (n + 1, k + 1, n - k + 1):
        if _is_nonpos_int(x):
            raise PoleError(f"q-binomial hits a Gamma_q pole at {x}")
    return q_gamma(q, n + 1) / (q_gamma(q, k + 1) * q_gamma(q, n - k + 1))


def mittag_leffler(alpha: float, beta: float, t: float, tol: float = 1e-16) -> float:
    """E_{alpha,beta}(t) = sum_n t^n / Gamma(alpha n + beta) for t >= 0.

    Terms are formed in log-space; 1/Gamma is taken as zero at its poles.
    """
    if alpha <= 0:
        raise QDomainError("alpha must be positive")
    if t < 0:
        raise QDomainError("only t >= 0 is supported")
    if t == 0:
        return float(special.rgamma(beta))
    total = 0.0
    lt = math.log(t)
    n = 0
    past_peak = False
    prev = 0.0
    while True:
        arg = alpha * n + beta
        if arg <= 0 and float(arg).is_integer():
            term = 0.0
        else:
            term = float(special.rgamma(arg)) * math.exp(n * lt) if arg <= 0 else math.exp(
                n * lt - special.gammaln(arg)
            )
        total += term
        if arg > 0 and term < prev:
            past_peak = True
        prev = term
        if past_peak and abs(term) < tol * abs(total):
            return total
        n += 1
        if n > 100000:
            raise ArithmeticError("Mittag-Leffler series did not converge")
