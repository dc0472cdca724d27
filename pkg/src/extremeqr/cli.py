"""Command-line front end.

    extremeqr fit       kernel conditional quantiles (and survival values) on an x grid
    extremeqr extreme   RQ / refined Pickands / GP extreme quantiles side by side
    extremeqr select    data-driven (h, k) selection per x
    extremeqr simulate  Monte Carlo MSE/Bias reports for the simulation scenarios

Parameters come from flags, then an optional ``--config`` file of
``key = value`` lines, then built-in defaults (in that order of precedence).
Exit status: 0 success, 1 configuration error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .conditional import local_window
from .errors import ConfigError, DataError, ExtremeQRError
from .gp_benchmark import build_exceedances, gp_fit, gp_quantile
from .io import clean_json, open_output, read_dataset, write_json, write_rows
from .kernel import KERNELS
from .pickands import RPConfig, WEIGHT_RULES, extrapolate, rp_gamma, rp_k_path
from .selection import (SelectionGrid, cv_bandwidth, default_h_grid, refined_h_grid,
                        select_hk_simultaneous, select_k_separate, yu_jones_bandwidth)
from .simulation import ERROR_MODELS, ESTIMATORS, EstimatorSpec, MCConfig, run_mc

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

COMMON_DEFAULTS = {"kernel": "triweight", "format": "csv", "out": None, "plot": None}

DEFAULTS = {
    "fit": {"data": None, "x_grid": None, "beta": "0.05", "h": None, "h_points": "50",
            "hmax_divisor": "2", "survival_at": None},
    "extreme": {"data": None, "x_grid": None, "beta": "0.01", "alpha": None, "J": "3",
                "r": None, "weights": "rp1", "h": None, "k": None, "h_points": "50",
                "hmax_divisor": "2"},
    "select": {"data": None, "x_grid": None, "beta": "0.01", "select": "separate", "J": "3",
               "r": None, "weights": "rp1", "h": None, "h_grid": None, "h_points": "50",
               "hmax_divisor": "2", "bandwidth": "cv", "window_h": "10", "trace": None},
    "simulate": {"scenario": "student", "estimator": None, "beta": None, "J": "3", "r": None,
                 "reps": "100", "n": "200", "seed": "0", "L": "100", "alphas": None,
                 "h_points": "50", "hmax_divisor": "2", "selection": "oracle",
                 "oracle_mode": "per_rep", "bandwidth": "cv", "workers": "1",
                 "paper_table": "false"},
}

# keys that change how a run executes but never what it computes
EXECUTION_ONLY = {"workers", "out", "plot", "config", "format", "trace"}


# ----------------------------------------------------------------------------
# parsing helpers


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def _float(key, v, lo=None, hi=None, open_lo=True, open_hi=True):
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {v!r}") from None
    if not math.isfinite(f):
        raise ConfigError(key, f"expected a finite number, got {v!r}")
    if lo is not None and (f <= lo if open_lo else f < lo):
        raise ConfigError(key, f"must be {'>' if open_lo else '>='} {lo}, got {f!r}")
    if hi is not None and (f >= hi if open_hi else f > hi):
        raise ConfigError(key, f"must be {'<' if open_hi else '<='} {hi}, got {f!r}")
    return f


def _int(key, v, lo=None):
    try:
        f = float(v)
        i = int(f)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected an integer, got {v!r}") from None
    if i != f:
        raise ConfigError(key, f"expected an integer, got {v!r}")
    if lo is not None and i < lo:
        raise ConfigError(key, f"must be >= {lo}, got {i}")
    return i


def _bool(key, v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(key, f"expected true/false, got {v!r}")


def _list(v):
    return [t.strip() for t in str(v).split(",") if t.strip()]


def _choice(key, v, choices):
    if v not in choices:
        raise ConfigError(key, f"unknown value {v!r}; choose from {', '.join(choices)}")
    return v


def parse_grid(key, spec: str, p: int = 1) -> np.ndarray:
    """'a:b:m' gives m evenly spaced points; otherwise a comma list. For p > 1
    points are separated by ';' with comma-separated coordinates."""
    spec = str(spec).strip()
    try:
        if p > 1:
            pts = [[float(c) for c in chunk.split(",")] for chunk in spec.split(";") if chunk.strip()]
            arr = np.array(pts, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != p:
                raise ConfigError(key, f"each point needs {p} coordinates")
            return arr
        if ":" in spec:
            a, b, m = spec.split(":")
            m = int(m)
            if m < 1:
                raise ConfigError(key, "point count must be positive")
            return np.linspace(float(a), float(b), m)
        return np.array([float(t) for t in _list(spec)])
    except ValueError:
        raise ConfigError(key, f"cannot parse grid {spec!r}") from None


def read_config_file(path: str) -> dict:
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    with fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("config", f"{path}, line {line_no}: expected key = value")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def merge_config(command: str, ns: argparse.Namespace) -> dict:
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "func")}
    merged = dict(COMMON_DEFAULTS)
    merged.update(DEFAULTS[command])
    if flags.get("config"):
        from_file = read_config_file(flags["config"])
        unknown = sorted(set(from_file) - set(merged))
        if unknown:
            raise ConfigError(unknown[0], f"unknown key in config file for '{command}'")
        merged.update(from_file)
    merged.update(flags)
    return merged


def _common(cfg):
    _choice("format", cfg["format"], ("csv", "json"))
    _choice("kernel", cfg["kernel"], tuple(KERNELS))
    return KERNELS[cfg["kernel"]]()


def _betas(cfg, default=None):
    raw = cfg.get("beta") if cfg.get("beta") is not None else default
    if raw is None:
        return []
    vals = [_float("beta", b, 0.0, 1.0) for b in _list(raw)]
    if not vals:
        raise ConfigError("beta", "no levels given")
    return vals


def _rp_params(cfg):
    J = _int("J", cfg["J"], 3)
    r = 1.0 / J if cfg.get("r") in (None, "") else _float("r", cfg["r"], 0.0, 1.0)
    rule = _choice("weights", cfg["weights"], tuple(WEIGHT_RULES))
    return J, r, rule


def _load(cfg):
    if not cfg.get("data"):
        raise ConfigError("data", "a dataset is required (--data)")
    return read_dataset(cfg["data"])


def _x_grid(cfg, sample):
    if cfg.get("x_grid") not in (None, ""):
        xg = parse_grid("x_grid", cfg["x_grid"], sample.p)
    elif sample.p == 1:
        xg = np.linspace(sample.xs[:, 0].min(), sample.xs[:, 0].max(), 51)
    else:
        raise ConfigError("x_grid", "multivariate data needs an explicit --x-grid")
    return xg.reshape(-1, 1) if xg.ndim == 1 else xg


def _x_columns(p):
    return ["x"] if p == 1 else [f"x{j + 1}" for j in range(p)]


def _x_fields(x, p):
    return dict(zip(_x_columns(p), (float(v) for v in x)))


def _bandwidth(cfg, sample, kern):
    """The fixed --h, or the cross-validated choice over the default grid."""
    if cfg.get("h") not in (None, ""):
        return _float("h", cfg["h"], 0.0), "fixed"
    points = _int("h_points", cfg["h_points"], 1)
    div = _float("hmax_divisor", cfg["hmax_divisor"], 0.0)
    return cv_bandwidth(sample, kern, default_h_grid(sample, points, div)), "cv"


def _echo(cfg, **extra) -> dict:
    out = {k: v for k, v in cfg.items() if k not in EXECUTION_ONLY and v is not None}
    out.update(extra)
    return out


def _emit(cfg, columns, rows, config, extra_json=None):
    with open_output(cfg.get("out")) as fh:
        if cfg["format"] == "json":
            payload = {"config": config, "columns": columns,
                       "rows": [{c: row.get(c) for c in columns} for row in rows]}
            if extra_json:
                payload.update(extra_json)
            write_json(fh, clean_json(payload))
        else:
            write_rows(fh, columns, rows, config)


def _summary(rows):
    flagged = sum(1 for r in rows if r.get("status") != "ok")
    print(f"rows: {len(rows)}, flagged: {flagged}", file=sys.stderr)
    return flagged


# ----------------------------------------------------------------------------
# commands


def cmd_fit(cfg) -> int:
    kern = _common(cfg)
    betas = _betas(cfg)
    survival_at = ([_float("survival_at", y) for y in _list(cfg["survival_at"])]
                   if cfg.get("survival_at") else [])
    sample = _load(cfg)
    xg = _x_grid(cfg, sample)
    h, h_mode = _bandwidth(cfg, sample, kern)
    xcols = _x_columns(sample.p)
    columns = xcols + ["h", "beta", "q_hat", "y", "survival", "n_star", "status"]
    rows = []
    for x in xg:
        win = local_window(sample, kern, h, x)
        base = dict(_x_fields(x, sample.p), h=h, n_star=win.n_star)
        status = "ok" if not win.is_empty else "empty_window"
        for b in betas:
            q = win.quantile(b) if status == "ok" else None
            rows.append(dict(base, beta=b, q_hat=q, status=status))
        for y in survival_at:
            sv = win.survival(y) if status == "ok" else None
            rows.append(dict(base, y=y, survival=sv, status=status))
    _emit(cfg, columns, rows, _echo(cfg, h=h, h_mode=h_mode))
    _summary(rows)
    if cfg.get("plot"):
        from .plotting import plot_curves
        if sample.p == 1:
            curves = {f"q_hat beta={b:g}": [r["q_hat"] for r in rows if r.get("beta") == b]
                      for b in betas}
            plot_curves(cfg["plot"], xg[:, 0], curves, points=(sample.xs[:, 0], sample.ys),
                        title=f"kernel conditional quantiles (h={h:.4g})", ylabel="y")
    return EXIT_OK


def _extreme_row(sample, kern, x, h, b, alpha, J, r, rule, k):
    """One (x, beta) row of RQ / RP / GP estimates with a status flag."""
    win = local_window(sample, kern, h, x)
    row = dict(h=h, beta=b, alpha=alpha, J=J, r=r, k=k, n_star=win.n_star)
    if win.is_empty:
        row["status"] = "empty_window"
        return row
    flags = []
    row["RQ"] = win.quantile(b)
    est = rp_gamma(sample, RPConfig.named(rule, alpha, J, r), kern, h, x)
    if est.degenerate:
        flags.append(f"rp_degenerate_j{est.collapsed}")
    else:
        row["RP"] = extrapolate(est, b)
        row["gamma_RP"] = est.gamma_hat
    if k is not None:
        try:
            e = build_exceedances(sample, kern, h, x, k)
            fit = gp_fit(e)
            row["GP"] = gp_quantile(fit, e, b)
            row["gamma_GP"] = fit.gamma_hat
            if not fit.converged:
                flags.append("gp_not_converged")
        except ExtremeQRError as exc:
            flags.append("gp_" + type(exc).__name__)
    row["status"] = ";".join(flags) if flags else "ok"
    return row


def cmd_extreme(cfg) -> int:
    kern = _common(cfg)
    betas = _betas(cfg)
    if cfg.get("alpha") in (None, ""):
        raise ConfigError("alpha", "the anchor order --alpha is required")
    alpha = _float("alpha", cfg["alpha"], 0.0, 1.0)
    bad = [b for b in betas if b > alpha]
    if bad:
        raise ConfigError("beta", f"extrapolation needs beta <= alpha={alpha}, got {bad[0]}")
    J, r, rule = _rp_params(cfg)
    k = None if cfg.get("k") in (None, "") else _int("k", cfg["k"], 1)
    sample = _load(cfg)
    xg = _x_grid(cfg, sample)
    h, h_mode = _bandwidth(cfg, sample, kern)
    columns = _x_columns(sample.p) + ["h", "beta", "alpha", "J", "r", "k", "n_star", "RQ", "RP",
                                      "GP", "gamma_RP", "gamma_GP", "status"]
    rows = []
    for x in xg:
        for b in betas:
            row = _extreme_row(sample, kern, x, h, b, alpha, J, r, rule, k)
            row.update(_x_fields(x, sample.p))
            rows.append(row)
    _emit(cfg, columns, rows, _echo(cfg, h=h, h_mode=h_mode, r=r))
    _summary(rows)
    if cfg.get("plot") and sample.p == 1:
        from .plotting import plot_curves
        b0 = betas[0]
        sel = [row for row in rows if row["beta"] == b0]
        curves = {"RQ": [row.get("RQ") for row in sel], f"RP ({rule})": [row.get("RP") for row in sel]}
        if k is not None:
            curves["GP"] = [row.get("GP") for row in sel]
        plot_curves(cfg["plot"], xg[:, 0], curves, points=(sample.xs[:, 0], sample.ys),
                    title=f"extreme conditional quantiles, beta={b0:g}", ylabel="y")
    return EXIT_OK


def _h_grid(cfg, sample):
    if cfg.get("h_grid") not in (None, ""):
        g = parse_grid("h_grid", cfg["h_grid"])
        if np.any(g <= 0) or np.any(np.diff(g) <= 0):
            raise ConfigError("h_grid", "bandwidths must be positive and increasing")
        return g
    return default_h_grid(sample, _int("h_points", cfg["h_points"], 1),
                          _float("hmax_divisor", cfg["hmax_divisor"], 0.0))


def cmd_select(cfg) -> int:
    kern = _common(cfg)
    betas = _betas(cfg)
    mode = _choice("select", cfg["select"], ("cv", "separate", "simultaneous"))
    bw = _choice("bandwidth", cfg["bandwidth"], ("cv", "yj"))
    J, r, rule = _rp_params(cfg)
    weights = WEIGHT_RULES[rule](J)
    window_h = _int("window_h", cfg["window_h"], 1)
    sample = _load(cfg)
    xg = _x_grid(cfg, sample)
    h_cv = cv_bandwidth(sample, kern, _h_grid(cfg, sample))
    columns = _x_columns(sample.p) + ["beta", "h", "k", "alpha", "n_star", "estimate", "score",
                                      "h_cv", "h_yj", "status"]
    rows, traces = [], []
    for b in betas:
        h_yj = yu_jones_bandwidth(h_cv, b)
        for x in xg:
            row = dict(_x_fields(x, sample.p), beta=b, h_cv=h_cv, h_yj=h_yj)
            trace = {"x": [float(v) for v in x], "beta": b}
            try:
                if mode == "cv":
                    win = local_window(sample, kern, h_cv, x)
                    row.update(h=h_cv, n_star=win.n_star)
                    row["estimate"] = None if win.is_empty else win.quantile(b)
                    row["status"] = "ok" if not win.is_empty else "empty_window"
                elif mode == "separate":
                    h = (_float("h", cfg["h"], 0.0) if cfg.get("h") not in (None, "")
                         else (h_cv if bw == "cv" else h_yj))
                    win = local_window(sample, kern, h, x)
                    ks, _, vals = rp_k_path(win, J, r, weights, b)
                    k_sel, score = select_k_separate(vals, ks, math.isqrt(win.n_star))
                    row.update(h=h, k=k_sel, alpha=k_sel / win.n_star, n_star=win.n_star,
                               estimate=float(vals[k_sel - 1]), score=score, status="ok")
                    trace["k_scan"] = [None if not math.isfinite(v) else float(v) for v in vals]
                else:
                    h_min = default_h_grid(sample, 2).min()
                    grid = SelectionGrid(tuple(refined_h_grid(h_cv, h_yj, h_min)), window_h=window_h)
                    cache = {}

                    def profile(h, x=x, b=b, cache=cache):
                        if h not in cache:
                            win = local_window(sample, kern, h, x)
                            cache[h] = (win.n_star, rp_k_path(win, J, r, weights, b)[2])
                        return cache[h]

                    def estimates(h, k):
                        return float(profile(h)[1][k - 1])

                    def n_star_of(h):
                        return profile(h)[0]

                    res = select_hk_simultaneous(estimates, grid, n_star_of)
                    n_star = n_star_of(res.h_selected)
                    row.update(h=res.h_selected, k=res.k_selected, alpha=res.k_selected / n_star,
                               n_star=n_star, estimate=res.estimate, score=res.stability_score,
                               status="ok")
                    trace["h_scan"] = res.trace
            except ExtremeQRError as exc:
                row["status"] = type(exc).__name__
                trace["error"] = str(exc)
                if getattr(exc, "trace", None):
                    trace["h_scan"] = exc.trace
            rows.append(row)
            traces.append(trace)
    if all(row["status"] != "ok" for row in rows):
        raise DataError("selection failed at every grid point")
    config = _echo(cfg, h_cv=h_cv, r=r)
    _emit(cfg, columns, rows, config, extra_json={"traces": traces})
    if cfg.get("trace"):
        with open_output(cfg["trace"]) as fh:
            write_json(fh, clean_json({"config": config, "traces": traces}))
    _summary(rows)
    if cfg.get("plot") and sample.p == 1:
        from .plotting import plot_curves
        b0 = betas[0]
        sel = [row for row in rows if row["beta"] == b0]
        plot_curves(cfg["plot"], xg[:, 0], {f"selected ({mode})": [row.get("estimate") for row in sel]},
                    points=(sample.xs[:, 0], sample.ys), title=f"data-driven selection, beta={b0:g}",
                    ylabel="y")
    return EXIT_OK


def _sim_configs(cfg):
    scenario = _choice("scenario", cfg["scenario"], ERROR_MODELS)
    betas = _betas(cfg)
    beta = betas[0] if betas else None
    names = _list(cfg["estimator"]) if cfg.get("estimator") else (
        ["RQ", "RP1", "RP2"] if beta is not None and _bool("paper_table", cfg["paper_table"])
        else ["gamma_RP1", "gamma_RP2"] if _bool("paper_table", cfg["paper_table"])
        else ["RP1" if beta is not None else "gamma_RP1"])
    for nm in names:
        _choice("estimator", nm, ESTIMATORS)
    Js = [_int("J", j, 3) for j in _list(cfg["J"])]
    r_fixed = None if cfg.get("r") in (None, "") else _float("r", cfg["r"], 0.0, 1.0)
    alphas = (tuple(_float("alphas", a, 0.0, 1.0) for a in _list(cfg["alphas"]))
              if cfg.get("alphas") else None)
    base = dict(scenario=scenario, reps=_int("reps", cfg["reps"], 1), n=_int("n", cfg["n"], 1),
                seed=_int("seed", cfg["seed"], 0), L=_int("L", cfg["L"], 1),
                h_points=_int("h_points", cfg["h_points"], 1),
                hmax_divisor=_float("hmax_divisor", cfg["hmax_divisor"], 0.0),
                selection=_choice("selection", cfg["selection"], ("oracle", "data")),
                oracle_mode=_choice("oracle_mode", cfg["oracle_mode"], ("per_rep", "average")),
                bandwidth=_choice("bandwidth", cfg["bandwidth"], ("cv", "yj")),
                kernel=cfg["kernel"], workers=_int("workers", cfg["workers"], 1))
    if alphas:
        base["alphas"] = alphas
    jobs = []
    for nm in names:
        for J in Js:
            r = r_fixed if r_fixed is not None else 1.0 / J
            spec = EstimatorSpec(nm, beta=beta if nm in ("RQ", "RP1", "RP2", "GP", "truth") else None,
                                 J=J, r=r)
            jobs.append(MCConfig(estimator=spec, **base))
    return jobs, Js, names


def cmd_simulate(cfg) -> int:
    _common(cfg)
    jobs, Js, names = _sim_configs(cfg)
    table_mode = _bool("paper_table", cfg["paper_table"])
    reports = []
    cache = {}
    for job in jobs:
        spec = job.estimator
        # RQ, GP and the truth oracle do not depend on (J, r)
        key = (spec.name, spec.beta) if spec.weight_rule is None else (spec.name, spec.beta, spec.J, spec.r)
        if key not in cache:
            cache[key] = run_mc(job)
        rep = cache[key]
        if rep.J != spec.J or rep.r != spec.r:
            rep = replace(rep, J=spec.J, r=spec.r)
        reports.append(rep)
    config = _echo(cfg)
    if table_mode:
        columns = ["J", "r"] + [f"{nm}_{m}" for nm in names for m in ("mse", "bias")]
        rows = []
        for J in Js:
            row = {"J": J}
            for rep in reports:
                if rep.J == J:
                    row["r"] = rep.r
                    row[f"{rep.estimator}_mse"] = rep.mse
                    row[f"{rep.estimator}_bias"] = rep.bias
            rows.append(row)
    else:
        columns = list(reports[0].SUMMARY_FIELDS)
        rows = [rep.summary() for rep in reports]
    extra = {"reports": [dict(rep.summary(), mse_se=rep.mse_se, bias_se=rep.bias_se)
                         for rep in reports]}
    _emit(cfg, columns, rows, config, extra_json=extra)
    for rep in reports:
        if rep.failed_reps:
            print(f"{rep.estimator} J={rep.J}: {rep.failed_reps}/{rep.reps} replications had "
                  f"no valid parameter cell", file=sys.stderr)
    if cfg.get("plot"):
        from .plotting import plot_errors
        per_point = {f"{rep.estimator} J={rep.J}": rep.per_point for rep in reports}
        plot_errors(cfg["plot"], reports[0].grid, per_point,
                    title=f"{cfg['scenario']} scenario, {reports[0].reps} replications")
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "extreme": cmd_extreme, "select": cmd_select, "simulate": cmd_simulate}


# ----------------------------------------------------------------------------
# argument parser


def _add_common(p):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--out", help="output path ('-' or omitted: stdout)")
    p.add_argument("--format", help="csv (default) or json")
    p.add_argument("--kernel", help="triweight (default), biweight or epanechnikov")
    p.add_argument("--plot", metavar="PNG", help="also render a figure (needs matplotlib)")


def _add_data(p):
    p.add_argument("--data", help="CSV with columns x (or x1..xp) and y")
    p.add_argument("--x-grid", dest="x_grid", help="'a:b:m' or comma list; ';' between points if p > 1")
    p.add_argument("--beta", help="comma-separated tail probabilities")
    p.add_argument("--h", help="bandwidth (default: cross-validated)")
    p.add_argument("--h-points", dest="h_points", help="size of the default bandwidth grid")
    p.add_argument("--hmax-divisor", dest="hmax_divisor", help="h_max = range / divisor (default 2)")


def _add_rp(p):
    p.add_argument("--J", help="number of quantile levels (>= 3)")
    p.add_argument("--r", help="level ratio in (0, 1) (default 1/J)")
    p.add_argument("--weights", help="rp1 (constant) or rp2 (linear)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="extremeqr", description=__doc__.split("\n\n")[0],
                     argument_default=argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("fit", help="kernel conditional quantiles on an x grid",
                       argument_default=argparse.SUPPRESS)
    _add_common(p)
    _add_data(p)
    p.add_argument("--survival-at", dest="survival_at", help="also emit survival values at these y")

    p = sub.add_parser("extreme", help="RQ, refined Pickands and GP extreme quantiles",
                       argument_default=argparse.SUPPRESS)
    _add_common(p)
    _add_data(p)
    _add_rp(p)
    p.add_argument("--alpha", help="anchor order alpha (beta <= alpha)")
    p.add_argument("--k", help="GP exceedance count; omit to skip the GP column")

    p = sub.add_parser("select", help="data-driven (h, k) selection",
                       argument_default=argparse.SUPPRESS)
    _add_common(p)
    _add_data(p)
    _add_rp(p)
    p.add_argument("--select", help="cv, separate (default) or simultaneous")
    p.add_argument("--h-grid", dest="h_grid", help="bandwidth grid for cross-validation")
    p.add_argument("--bandwidth", help="separate rule bandwidth: cv (default) or yj")
    p.add_argument("--window-h", dest="window_h", help="h window of the simultaneous rule")
    p.add_argument("--trace", help="write per-point stability traces (JSON) here")

    p = sub.add_parser("simulate", help="Monte Carlo MSE/Bias reports",
                       argument_default=argparse.SUPPRESS)
    _add_common(p)
    _add_rp(p)
    p.add_argument("--scenario", help="gaussian, student or beta")
    p.add_argument("--estimator", help=f"comma list from {', '.join(ESTIMATORS)}")
    p.add_argument("--beta", help="tail probability for quantile estimators")
    p.add_argument("--reps", help="replications")
    p.add_argument("--n", help="sample size")
    p.add_argument("--seed", help="master seed")
    p.add_argument("--L", help="evaluation points")
    p.add_argument("--alphas", help="alpha grid (comma list)")
    p.add_argument("--h-points", dest="h_points", help="bandwidth grid size")
    p.add_argument("--hmax-divisor", dest="hmax_divisor", help="h_max = range / divisor")
    p.add_argument("--selection", help="oracle (default) or data")
    p.add_argument("--oracle-mode", dest="oracle_mode", help="per_rep (default) or average")
    p.add_argument("--bandwidth", help="data selection bandwidth: cv or yj")
    p.add_argument("--workers", help="worker processes (output does not depend on it)")
    p.add_argument("--paper-table", dest="paper_table", action="store_const", const="true",
                   help="rows J, columns MSE/Bias per estimator")
    return parser


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = merge_config(ns.command, ns)
        return COMMANDS[ns.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort exit code mapping
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
