"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 validation failure. Errors are also written to stderr as one JSON object.
"""
from __future__ import annotations

import functools
import io
import json
import math
import sys
from pathlib import Path

import click
import numpy as np
from scipy import stats

from . import __version__
from . import asymptotics as A
from . import kernels as K
from . import montecarlo as MC
from . import resetdensity as R
from .measures import mu_limit_moment, mu_t_moment, truncation_index
from .splines import SplineBuildError, SplineRangeError

EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 2, 3, 4


class ConfigError(click.ClickException):
    exit_code = EXIT_CONFIG


def _fail(kind: str, msg: str, code: int):
    sys.stderr.write(json.dumps({"error": kind, "message": msg}) + "\n")
    sys.exit(code)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--{name}: expected comma-separated numbers, got {text!r}")
    if not vals:
        raise ConfigError(f"--{name} must not be empty")
    return vals


def _grid(text: str) -> list[float]:
    """'a:b:n' (n evenly spaced points) or a comma-separated list."""
    if ":" in text:
        try:
            a, b, n = text.split(":")
            n = int(n)
            a, b = float(a), float(b)
        except ValueError:
            raise ConfigError(f"--y-grid: expected start:stop:num, got {text!r}")
        if n < 1:
            raise ConfigError("--y-grid needs at least one point")
        return list(np.linspace(a, b, n))
    return _floats(text, "y-grid")


def _kernel(name: str, alpha, d: int, drift: float) -> K.KernelModel:
    try:
        if name == "brownian":
            return K.Brownian(d)
        if alpha is None:
            if name == "cauchy":
                return K.Cauchy1D(drift)
            raise ConfigError(f"--alpha is required for kernel {name!r}")
        if name == "symmetric":
            return K.SymmetricStable1D(alpha)
        if name == "subordinator":
            return K.SubordinatorHalf() if alpha == 0.5 else K.SubordinatorGeneral(alpha)
        if name == "cauchy":
            return K.Cauchy1D(drift)
        if name == "cylindrical":
            return K.Cylindrical(alpha, d)
    except K.KernelError as exc:
        raise ConfigError(str(exc))
    raise ConfigError(f"unknown kernel {name!r}")


def _model(ctx) -> R.ResetModel:
    o = ctx.obj
    if (o["c"] is None) == (o["m"] is None):
        raise ConfigError("give exactly one of --c and --m")
    kern = _kernel(o["kernel"], o["alpha"], o["d"], o["drift"])
    try:
        return R.ResetModel(kern, c=o["c"], m=o["m"])
    except ValueError as exc:
        raise ConfigError(str(exc))


def _header(ctx, extra: dict | None = None) -> list[str]:
    cfg = dict(ctx.obj)
    cfg["subcommand"] = ctx.info_name
    cfg.update(ctx.params)
    if extra:
        cfg.update(extra)
    cfg.pop("out", None)
    seed = cfg.get("seed")
    return [
        f"reset_kernels {__version__}",
        "config " + json.dumps(cfg, sort_keys=True, default=str),
        f"seed {seed}",
    ]


def _emit(ctx, columns: list[str], rows: list[list], extra: dict | None = None, gnuplot: tuple | None = None):
    o = ctx.obj
    header = _header(ctx, extra)
    buf = io.StringIO()
    if o["format"] == "json":
        doc = {"header": header, "columns": columns, "rows": [[_json_val(v) for v in r] for r in rows]}
        buf.write(json.dumps(doc, indent=1) + "\n")
    else:
        for line in header:
            buf.write(f"# {line}\n")
        buf.write(",".join(columns) + "\n")
        for r in rows:
            buf.write(",".join(_fmt(v) for v in r) + "\n")
    out = o["out"]
    if out:
        Path(out).write_text(buf.getvalue())
        if o["emit_gnuplot"] and gnuplot is not None:
            _write_gnuplot(out, columns, *gnuplot)
    else:
        sys.stdout.write(buf.getvalue())


def _json_val(v):
    if isinstance(v, (str, type(None))):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else str(v)


def _write_gnuplot(out: str, columns: list[str], xcol: str, ycol: str, logscale: bool = False):
    ix, iy = columns.index(xcol) + 1, columns.index(ycol) + 1
    script = Path(out).with_suffix(".gp")
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set xlabel '{xcol}'",
        f"set ylabel '{ycol}'",
    ]
    if logscale:
        lines.append("set logscale y")
    lines.append(f"plot '{Path(out).name}' using {ix}:{iy} with linespoints")
    script.write_text("\n".join(lines) + "\n")


@click.group()
@click.version_option(__version__)
@click.option("--kernel", type=click.Choice(["brownian", "symmetric", "subordinator", "cauchy", "cylindrical"]), default="brownian")
@click.option("--alpha", type=float, default=None, help="stability index (not for brownian)")
@click.option("--d", "d", type=int, default=1, help="dimension (brownian, cylindrical)")
@click.option("--drift", type=float, default=0.0, help="drift of the cauchy kernel")
@click.option("--c", "c", type=float, default=None, help="resetting factor c")
@click.option("--m", "m", type=float, default=None, help="reduced parameter m = c^alpha")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="output file (stdout if omitted)")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--emit-gnuplot", is_flag=True, help="write a companion .gp plot script next to --out")
@click.pass_context
def main(ctx, kernel, alpha, d, drift, c, m, out, fmt, emit_gnuplot):
    """Densities, stationary laws, moments and asymptotics of stable processes with partial resetting."""
    ctx.obj = {
        "kernel": kernel,
        "alpha": alpha,
        "d": d,
        "drift": drift,
        "c": c,
        "m": m,
        "out": out,
        "format": fmt,
        "emit_gnuplot": emit_gnuplot,
    }


def _output_options(fn):
    """Let --out/--format/--emit-gnuplot also follow the subcommand name."""

    @click.option("--out", "sub_out", type=click.Path(dir_okay=False), default=None, help="output file")
    @click.option("--format", "sub_fmt", type=click.Choice(["csv", "json"]), default=None)
    @click.option("--emit-gnuplot", "sub_gp", is_flag=True, default=False, help="write a .gp plot script next to --out")
    @functools.wraps(fn)
    def wrapper(*args, sub_out, sub_fmt, sub_gp, **kwargs):
        ctx = click.get_current_context()
        if sub_out is not None:
            ctx.obj["out"] = sub_out
        if sub_fmt is not None:
            ctx.obj["format"] = sub_fmt
        if sub_gp:
            ctx.obj["emit_gnuplot"] = True
        for k in ("sub_out", "sub_fmt", "sub_gp"):
            ctx.params.pop(k, None)
        return fn(*args, **kwargs)

    return wrapper


def _point(value: float, d: int):
    return value if d == 1 else np.full(d, value / math.sqrt(d))


@main.command()
@click.option("--t", "t", required=True, help="comma-separated times")
@click.option("--x", "x", type=float, default=0.0, help="starting point")
@click.option("--y-grid", "y_grid", required=True, help="start:stop:num or comma list")
@click.option("--method", type=click.Choice(["series", "origin", "mixture", "both"]), default="series")
@_output_options
@click.pass_context
def density(ctx, t, x, y_grid, method):
    """Transition density p(t; x, y) on a grid."""
    model = _model(ctx)
    ts = _floats(t, "t")
    ys = _grid(y_grid)
    if model.d != 1:
        raise ConfigError("the density command evaluates one-dimensional kernels")
    if method in ("origin", "mixture", "both") and x != 0.0:
        raise ConfigError(f"--method {method} needs --x 0")
    rows = []
    for tt in ts:
        if tt <= 0:
            raise ConfigError("times must be positive")
        J = truncation_index(tt)
        tail = float(stats.poisson.sf(J, tt))
        ya = np.asarray(ys)
        series = R.p_reset(model, tt, x, ya)
        if method == "both":
            mix = R.p_reset_mixture(model, tt, ya)
            for y, a, b in zip(ys, series, mix):
                rows.append([tt, x, y, a, b, abs(a - b) / max(abs(a), 1e-300)])
            continue
        if method == "series":
            vals = series
        elif method == "origin":
            vals = R.p_reset_origin(model, tt, ya)
        else:
            vals = R.p_reset_mixture(model, tt, ya)
        if x == 0.0:
            other = R.p_reset_mixture(model, tt, ya) if method != "mixture" else series
            err = np.abs(vals - other)
        else:
            err = np.full(len(ys), tail)
        for y, v, e in zip(ys, vals, err):
            rows.append([tt, x, y, v, method, e])
    if method == "both":
        cols = ["t", "x", "y", "p_series", "p_mixture", "rel_diff"]
    else:
        cols = ["t", "x", "y", "p", "method", "err_est"]
    _emit(ctx, cols, rows, {"m_derived": model.m, "c_derived": model.c}, gnuplot=("y", cols[3], True))


@main.command()
@click.option("--y-grid", "y_grid", required=True, help="start:stop:num or comma list")
@click.option("--method", type=click.Choice(["auto", "mixture", "resolvent_series"]), default="auto")
@_output_options
@click.pass_context
def stationary(ctx, y_grid, method):
    """Stationary density rho(y)."""
    model = _model(ctx)
    ys = _grid(y_grid)
    if model.d != 1:
        pts = [_point(y, model.d) for y in ys]
        vals = [R.rho(model, p, method) for p in pts]
    else:
        vals = R.rho(model, np.asarray(ys), method)
    rows = [[y, v, method] for y, v in zip(ys, np.atleast_1d(vals))]
    _emit(ctx, ["y", "rho", "method"], rows, {"m_derived": model.m, "c_derived": model.c}, gnuplot=("y", "rho", True))


@main.command()
@click.option("--t", "t", default="inf", help="comma-separated times; 'inf' for the limit measure")
@click.option("--gamma", "gamma", default="", help="comma-separated real orders")
@click.option("--kmax", type=int, default=5, help="integer orders 1..kmax are always listed")
@_output_options
@click.pass_context
def moments(ctx, t, gamma, kmax):
    """Moments of mu_t / mu (and of rho for t = inf)."""
    model = _model(ctx)
    ts = [math.inf if v.strip() == "inf" else float(v) for v in t.split(",") if v.strip()]
    if not ts:
        raise ConfigError("--t must not be empty")
    orders = [float(k) for k in range(1, kmax + 1)]
    if gamma:
        orders += [g for g in _floats(gamma, "gamma") if g not in orders]
    rows = []
    for tt in ts:
        for g in orders:
            mu = mu_limit_moment(g, model.m) if math.isinf(tt) else mu_t_moment(g, tt, model.m)
            rho_m = None
            if math.isinf(tt) and model.d == 1 and not isinstance(model.kernel, K.Cylindrical):
                try:
                    rho_m = R.rho_moment(model, g)
                except K.KernelError:
                    rho_m = None
            rows.append(["inf" if math.isinf(tt) else tt, g, mu, rho_m])
    _emit(ctx, ["t", "gamma", "mu_moment", "rho_abs_moment"], rows, {"m_derived": model.m})


@main.command()
@click.option("--t", "t", required=True, help="comma-separated times")
@click.option("--y-grid", "y_grid", required=True, help="|y| values: start:stop:num or comma list")
@click.option("--delta", type=float, default=A.DEFAULT_DELTA)
@click.option("--exact/--no-exact", default=False, help="attach the quadrature value of p")
@_output_options
@click.pass_context
def asymptotics(ctx, t, y_grid, delta, exact):
    """Regime classification and Brownian asymptotics on a (t, |y|) grid."""
    o = ctx.obj
    if o["kernel"] != "brownian":
        raise ConfigError("asymptotic evaluators are implemented for brownian kernels")
    model = _model(ctx)
    rows = []
    for tt in _floats(t, "t"):
        for r in _grid(y_grid):
            y = _point(r, model.d)
            rep = A.classify_regime(model.m, tt, y, delta)
            v = rep.L / tt
            if rep.regime == "bulk":
                rep = A.brownian_bulk_approx(model.m, tt, y, model.d, delta=delta, exact=exact)
            elif rep.regime == "tail":
                rep = A.brownian_tail_approx(model.m, tt, y, model.d, delta=delta, exact=exact)
            rows.append([tt, r, v, rep.regime, rep.approximation, rep.error_estimate, rep.exact_reference])
    cols = ["t", "abs_y", "y2_over_4t2", "regime", "approximation", "error_estimate", "exact"]
    _emit(ctx, cols, rows, {"m_derived": model.m})


@main.command()
@click.option("--t", "t", type=float, required=True)
@click.option("--paths", type=int, default=100000)
@click.option("--seed", type=int, default=0)
@click.option("--bins", type=int, default=40)
@click.option("--range", "hist_range", type=(float, float), default=(-8.0, 8.0))
@click.option("--drift-kernel", is_flag=True, help="simulate Y_t = t (additive increase, multiplicative decrease)")
@_output_options
@click.pass_context
def simulate(ctx, t, paths, seed, bins, hist_range, drift_kernel):
    """Monte Carlo endpoint statistics (JSON) and histogram (CSV next to --out)."""
    o = ctx.obj
    kind = "drift" if drift_kernel else o["kernel"]
    if kind == "cylindrical" or o["d"] != 1:
        raise ConfigError("simulation supports one-dimensional kernels")
    if (o["c"] is None) == (o["m"] is None):
        raise ConfigError("give exactly one of --c and --m")
    try:
        cfg = MC.SimConfig(
            kind,
            t=t,
            n_paths=paths,
            seed=seed,
            c=o["c"],
            m=o["m"],
            alpha=o["alpha"] if o["alpha"] is not None else (2.0 if kind == "brownian" else 1.0),
            drift=o["drift"],
            hist_range=hist_range,
            bins=bins,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    ens = MC.simulate_endpoint(cfg)
    doc = {"header": _header(ctx), "stats": ens.to_dict()}
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if o["out"]:
        Path(o["out"]).write_text(text)
        csv_path = Path(o["out"]).with_suffix(".csv")
        ens.write_histogram_csv(csv_path, header="\n".join(_header(ctx)))
        if o["emit_gnuplot"]:
            _write_gnuplot(str(csv_path), ["bin_left", "bin_right", "mass", "stderr"], "bin_left", "mass")
    else:
        sys.stdout.write(text)


@main.command()
@click.option("--only", default="", help="comma-separated check numbers (default: all)")
@_output_options
@click.pass_context
def validate(ctx, only):
    """Run the acceptance checks; exit code 4 if any fails."""
    from .validation import run_all

    select = None
    if only:
        try:
            select = {int(v) for v in only.split(",") if v.strip()}
        except ValueError:
            raise ConfigError("--only expects comma-separated integers")
    results = run_all(select)
    doc = {
        "header": _header(ctx),
        "passed": all(r.passed for r in results),
        "checks": [
            {"number": r.number, "name": r.name, "passed": r.passed, "seconds": r.seconds, "details": r.details}
            for r in results
        ],
    }
    text = json.dumps(doc, indent=1, default=_json_val) + "\n"
    if ctx.obj["out"]:
        Path(ctx.obj["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    if not doc["passed"]:
        sys.exit(EXIT_VALIDATION)


def run(argv=None):
    """Entry point with exit-code mapping for numerical failures."""
    try:
        main.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        code = exc.exit_code if exc.exit_code else EXIT_CONFIG
        _fail("config", exc.format_message(), code)
    except click.exceptions.Abort:
        _fail("aborted", "aborted", 1)
    except (K.KernelError, A.RegimeError, ValueError) as exc:
        _fail("config", str(exc), EXIT_CONFIG)
    except (ArithmeticError, SplineBuildError, SplineRangeError, K.InversionError) as exc:
        _fail("numeric", str(exc), EXIT_NUMERIC)
    sys.exit(0)


if __name__ == "__main__":
    run()
