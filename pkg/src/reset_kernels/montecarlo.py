"""Monte Carlo simulation of the endpoint X_t of the process with partial resetting.

Paths are simulated in fixed blocks; block b draws from its own generator
seeded with SeedSequence([seed, b]), so results do not depend on how blocks
are scheduled. Per-block sums are combined in block order.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "SimConfig",
    "EnsembleStats",
    "TVEstimate",
    "sample_stable",
    "simulate_endpoint",
    "simulate_paths_endpoint",
    "tv_estimate",
    "KERNELS",
]

KERNELS = ("brownian", "symmetric", "subordinator", "cauchy", "drift")
_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


def sample_stable(alpha: float, kind: str, rng: np.random.Generator, size=None):
    """Draws from p_0(1; 0, .) of the stable kernels.

    gaussian: N(0, 2). symmetric: Chambers-Mallows-Stuck with E e^{iwX} = e^{-|w|^alpha}.
    subordinator: Kanter's representation with E e^{-uX} = e^{-u^alpha}.
    """
    if kind == "gaussian" or (kind == "symmetric" and alpha == 2.0):
        return rng.normal(0.0, math.sqrt(2.0), size)
    if kind == "symmetric":
        if not (0 < alpha <= 2):
            raise ValueError("symmetric stable laws need 0 < alpha <= 2")
        u = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size)
        w = rng.standard_exponential(size)
        if alpha == 1.0:
            return np.tan(u)
        return (
            np.sin(alpha * u)
            / np.cos(u) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
        )
    if kind == "subordinator":
        if not (0 < alpha < 1):
            raise ValueError("subordinators need 0 < alpha < 1")
        u = rng.uniform(0.0, math.pi, size)
        w = rng.standard_exponential(size)
        a = (
            np.sin((1.0 - alpha) * u)
            * np.sin(alpha * u) ** (alpha / (1.0 - alpha))
            / np.sin(u) ** (1.0 / (1.0 - alpha))
        )
        return (a / w) ** ((1.0 - alpha) / alpha)
    raise ValueError(f"unknown kind {kind!r}")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings. Give ``c`` or ``m`` (m = c^alpha)."""

    kernel: str
    t: float
    n_paths: int
    seed: int
    c: float | None = None
    m: float | None = None
    alpha: float = 2.0
    drift: float = 0.0
    hist_range: tuple = (-8.0, 8.0)
    bins: int = 40
    block_size: int = 1 << 16

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}")
        if self.kernel == "brownian" and self.alpha != 2.0:
            object.__setattr__(self, "alpha", 2.0)
        if self.kernel in ("cauchy", "drift"):
            object.__setattr__(self, "alpha", 1.0)
        if self.kernel == "symmetric" and not (0 < self.alpha < 2):
            raise ValueError("symmetric kernels need 0 < alpha < 2")
        if self.kernel == "subordinator" and not (0 < self.alpha < 1):
            raise ValueError("subordinators need 0 < alpha < 1")
        if (self.c is None) == (self.m is None):
            raise ValueError("give exactly one of c and m")
        if self.c is None:
            object.__setattr__(self, "c", float(self.m) ** (1.0 / self.alpha))
        else:
            object.__setattr__(self, "m", float(self.c) ** self.alpha)
        if not (0.0 < self.c <= 1.0):
            raise ValueError("c must lie in (0, 1]")
        if self.n_paths < 1 or self.bins < 1 or self.block_size < 1:
            raise ValueError("n_paths, bins and block_size must be positive")
        if self.t <= 0:
            raise ValueError("t must be positive")
        lo, hi = self.hist_range
        if not hi > lo:
            raise ValueError("hist_range must be increasing")
        object.__setattr__(self, "hist_range", (float(lo), float(hi)))

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.hist_range[0], self.hist_range[1], self.bins + 1)

    def finite_moment_orders(self) -> list[int]:
        if self.kernel in ("brownian", "drift"):
            return [1, 2, 3, 4]
        # E|X|^k is finite only for k < alpha
        return [k for k in (1, 2, 3, 4) if k < self.alpha]


@dataclass
class EnsembleStats:
    config: dict
    n_paths: int
    moments: dict
    moment_stderr: dict
    quantiles: dict
    edges: list
    mass: list
    mass_stderr: list
    below_range: float
    above_range: float
    mean_epochs: float
    epochs_stderr: float
    samples: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "samples"}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write_histogram_csv(self, path, header: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header:
                for line in header.splitlines():
                    fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "mass", "stderr"])
            for i in range(len(self.mass)):
                w.writerow([repr(self.edges[i]), repr(self.edges[i + 1]), repr(self.mass[i]), repr(self.mass_stderr[i])])


def _increment(cfg: SimConfig, dt: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = dt.size
    if cfg.kernel == "drift":
        return dt.copy()
    if cfg.kernel == "brownian":
        return np.sqrt(2.0 * dt) * rng.standard_normal(n)
    if cfg.kernel == "cauchy":
        return dt * sample_stable(1.0, "symmetric", rng, n) + cfg.drift * dt
    kind = "symmetric" if cfg.kernel == "symmetric" else "subordinator"
    return dt ** (1.0 / cfg.alpha) * sample_stable(cfg.alpha, kind, rng, n)


def _simulate_block(cfg: SimConfig, n: int, rng: np.random.Generator):
    x = np.zeros(n)
    left = np.full(n, float(cfg.t))
    epochs = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    while active.size:
        e = rng.standard_exponential(active.size)
        reset = e < left[active]
        dt = np.where(reset, e, left[active])
        x[active] += _increment(cfg, dt, rng)
        left[active] -= dt
        hit = active[reset]
        x[hit] *= cfg.c
        epochs[hit] += 1
        active = hit
    return x, epochs


def simulate_paths_endpoint(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """All endpoints X_t and epoch counts, in block order."""
    xs, ns = [], []
    nblocks = math.ceil(cfg.n_paths / cfg.block_size)
    for b in range(nblocks):
        size = min(cfg.block_size, cfg.n_paths - b * cfg.block_size)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(cfg.seed) & (2**64 - 1), b])))
        x, n = _simulate_block(cfg, size, rng)
        xs.append(x)
        ns.append(n)
    return np.concatenate(xs), np.concatenate(ns)


def _blocked_mean(values: np.ndarray, block: int) -> float:
    # pairwise sums per block, combined in block order
    parts = [float(np.sum(values[i : i + block])) for i in range(0, values.size, block)]
    return math.fsum(parts) / values.size


def simulate_endpoint(cfg: SimConfig, keep_samples: bool = False) -> EnsembleStats:
    """Simulate cfg.n_paths endpoints and summarise them."""
    x, epochs = simulate_paths_endpoint(cfg)
    n = x.size
    bs = cfg.block_size
    moments, stderr = {}, {}
    for k in cfg.finite_moment_orders():
        xk = x**k
        mk = _blocked_mean(xk, bs)
        m2k = _blocked_mean(xk * xk, bs)
        moments[k] = mk
        stderr[k] = math.sqrt(max(m2k - mk * mk, 0.0) / max(n - 1, 1))
    qs = np.quantile(x, _QUANTILES)
    edges = cfg.edges
    counts, _ = np.histogram(x, bins=edges)
    mass = counts / n
    mass_se = np.sqrt(mass * (1.0 - mass) / max(n - 1, 1))
    ep_mean = _blocked_mean(epochs.astype(float), bs)
    ep_var = _blocked_mean(epochs.astype(float) ** 2, bs) - ep_mean**2
    return EnsembleStats(
        config=asdict(cfg),
        n_paths=n,
        moments=moments,
        moment_stderr=stderr,
        quantiles={str(q): float(v) for q, v in zip(_QUANTILES, qs)},
        edges=[float(e) for e in edges],
        mass=[float(v) for v in mass],
        mass_stderr=[float(v) for v in mass_se],
        below_range=float(np.count_nonzero(x < edges[0]) / n),
        above_range=float(np.count_nonzero(x > edges[-1]) / n),
        mean_epochs=ep_mean,
        epochs_stderr=math.sqrt(max(ep_var, 0.0) / max(n - 1, 1)),
        samples=x if keep_samples else None,
    )


@dataclass(frozen=True)
class TVEstimate:
    tv: float
    noise_floor: float
    note: str


_XB, _WB = leggauss(8)


def bin_masses(reference, edges) -> np.ndarray:
    """int_bin reference(y) dy for each histogram bin (8-point Gauss-Legendre)."""
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    y = 0.5 * (b - a)[:, None] * (_XB + 1.0) + a[:, None]
    vals = np.asarray(reference(y.ravel()), dtype=float).reshape(y.shape)
    return (vals * (0.5 * (b - a)[:, None] * _WB)).sum(axis=1)


def tv_estimate(stats: EnsembleStats, reference) -> TVEstimate:
    """Binned total-variation distance between the ensemble and a reference.

    ``reference`` is a density (vectorised callable) or an EnsembleStats on the
    same bins. Mass outside the histogram range counts as one extra bin.
    The noise floor is the expected value of the statistic under pure
    sampling noise; the binned distance is a lower bound for the true one.
    """
    emp = np.asarray(stats.mass)
    emp_out = stats.below_range + stats.above_range
    if isinstance(reference, EnsembleStats):
        if reference.edges != stats.edges:
            raise ValueError("histograms must share bins")
        ref = np.asarray(reference.mass)
        ref_out = reference.below_range + reference.above_range
    else:
        ref = bin_masses(reference, stats.edges)
        ref_out = max(0.0, 1.0 - float(ref.sum()))
    tv = 0.5 * (float(np.abs(emp - ref).sum()) + abs(emp_out - ref_out))
    n = stats.n_paths
    p = np.append(np.clip(ref, 0.0, 1.0), min(max(ref_out, 0.0), 1.0))
    noise = 0.5 * float(np.sum(np.sqrt(2.0 * p * (1.0 - p) / (math.pi * n))))
    note = "binned distance: a lower bound for the true total variation"
    return TVEstimate(tv, noise, note)
