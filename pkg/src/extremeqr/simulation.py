"""Monte Carlo harness: the three heteroscedastic location-scale scenarios with
closed-form truth, MSE/Bias metrics over an evaluation grid, and a
replication engine with oracle (minimum-MSE) or data-driven parameter choice.

Model: Y = G(X) + sigma(X) U with X ~ Uniform(0, 1) and
    G(x)     = sqrt(x (1 - x)) sin(2 pi (1 + 2^(-7/5)) / (x + 2^(-7/5)))
    sigma(x) = (1 + x) / 10
    nu(x)    = 1 / ((1/10 + sin(pi x)) (11/10 - exp(-64 (x - 1/2)^2) / 2))
U | X = x is standard normal, Student t with floor(nu(x)) + 1 degrees of
freedom, or Beta(nu(x), nu(x)).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .conditional import Sample, local_window, quantile_grid
from .errors import ConfigError, DomainError, ExtremeQRError
from .gp_benchmark import build_exceedances, gp_fit, gp_quantile, threshold_exceedances
from .kernel import KERNELS
from .pickands import WEIGHT_RULES, extrapolate_arrays, rp_arrays, rp_k_path
from .selection import (cv_bandwidth, default_h_grid, select_k_separate, yu_jones_factor)

__all__ = [
    "ERROR_MODELS",
    "ESTIMATORS",
    "ALPHA_GRID",
    "Scenario",
    "EstimatorSpec",
    "MCConfig",
    "MetricReport",
    "generate",
    "evaluation_points",
    "true_quantile_eval",
    "mse_bias",
    "replicate",
    "run_mc",
]

ERROR_MODELS = ("gaussian", "student", "beta")
QUANTILE_ESTIMATORS = ("RQ", "RP1", "RP2", "GP", "truth")
GAMMA_ESTIMATORS = ("gamma_RP1", "gamma_RP2", "gamma_GP", "gamma_truth")
ESTIMATORS = QUANTILE_ESTIMATORS + GAMMA_ESTIMATORS
ALPHA_GRID = tuple(round(0.1 + 0.05 * i, 10) for i in range(18))
_SHIFT = 2.0 ** -1.4


# ----------------------------------------------------------------------------
# scenarios


def location(x):
    x = np.asarray(x, dtype=float)
    return np.sqrt(x * (1.0 - x)) * np.sin(2.0 * np.pi * (1.0 + _SHIFT) / (x + _SHIFT))


def scale(x):
    return (1.0 + np.asarray(x, dtype=float)) / 10.0


def nu(x):
    x = np.asarray(x, dtype=float)
    return 1.0 / ((0.1 + np.sin(np.pi * x)) * (1.1 - 0.5 * np.exp(-64.0 * (x - 0.5) ** 2)))


def student_df(x):
    return np.floor(nu(x)) + 1.0


@dataclass(frozen=True)
class Scenario:
    error_model: str
    n: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.error_model not in ERROR_MODELS:
            raise ConfigError("scenario", f"unknown scenario {self.error_model!r}; "
                                          f"choose from {', '.join(ERROR_MODELS)}")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n", f"sample size must be a positive integer, got {self.n!r}")

    def true_gamma(self, x):
        x = np.asarray(x, dtype=float)
        if self.error_model == "gaussian":
            return np.zeros_like(x)
        if self.error_model == "student":
            return 1.0 / student_df(x)
        return -1.0 / nu(x)

    def error_ppf(self, v, x):
        """Inverse CDF of U | X = x at v."""
        if self.error_model == "gaussian":
            return stats.norm.ppf(v)
        if self.error_model == "student":
            return stats.t.ppf(v, student_df(x))
        a = nu(x)
        return stats.beta.ppf(v, a, a)

    def error_isf(self, beta, x):
        """Inverse survival function of U | X = x at beta."""
        if self.error_model == "gaussian":
            return stats.norm.isf(beta) + 0.0 * np.asarray(x, dtype=float)
        if self.error_model == "student":
            return stats.t.isf(beta, student_df(x))
        a = nu(x)
        return stats.beta.isf(beta, a, a)

    def true_quantile(self, beta, x):
        return location(x) + scale(x) * self.error_isf(beta, x)


def true_quantile_eval(sc: Scenario, beta: float, x):
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    out = sc.true_quantile(beta, x)
    return float(out) if np.ndim(out) == 0 else out


def generate(sc: Scenario, rng: np.random.Generator | None = None) -> Sample:
    """n iid pairs; the errors come from one uniform stream by inversion."""
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(sc.seed))
    x = rng.random(sc.n)
    v = rng.random(sc.n)
    u = sc.error_ppf(v, x)
    return Sample(x, location(x) + scale(x) * u)


def evaluation_points(L: int = 100) -> np.ndarray:
    """x_l = (l - 1/2) / L, l = 1..L."""
    return (np.arange(1, L + 1) - 0.5) / L


# ----------------------------------------------------------------------------
# configuration and reports


@dataclass(frozen=True)
class EstimatorSpec:
    name: str
    beta: float | None = None
    J: int = 3
    r: float = 1.0 / 3.0

    def __post_init__(self):
        if self.name not in ESTIMATORS:
            raise ConfigError("estimator", f"unknown estimator {self.name!r}; "
                                           f"choose from {', '.join(ESTIMATORS)}")
        if self.targets_quantile:
            if self.beta is None or not 0 < self.beta < 1:
                raise ConfigError("beta", f"quantile estimators need beta in (0, 1), got {self.beta!r}")
        if int(self.J) != self.J or self.J < 3:
            raise ConfigError("J", f"J must be an integer >= 3, got {self.J!r}")
        if not 0 < self.r < 1:
            raise ConfigError("r", f"r must lie in (0, 1), got {self.r!r}")

    @property
    def targets_quantile(self) -> bool:
        return self.name in QUANTILE_ESTIMATORS

    @property
    def weight_rule(self) -> str | None:
        for rule in ("RP1", "RP2"):
            if self.name.endswith(rule):
                return rule.lower()
        return None


@dataclass(frozen=True)
class MCConfig:
    scenario: str
    estimator: EstimatorSpec
    reps: int = 100
    n: int = 200
    seed: int = 0
    L: int = 100
    alphas: tuple = ALPHA_GRID
    h_points: int = 50
    hmax_divisor: float = 2.0
    selection: str = "oracle"        # oracle | data
    oracle_mode: str = "per_rep"     # per_rep | average
    bandwidth: str = "cv"            # data mode: cv | yj
    kernel: str = "triweight"
    workers: int = 1

    def __post_init__(self):
        Scenario(self.scenario, self.n)
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError("reps", f"reps must be a positive integer, got {self.reps!r}")
        if self.L < 1:
            raise ConfigError("L", "need at least one evaluation point")
        if self.h_points < 1:
            raise ConfigError("h_points", "need at least one bandwidth")
        if any(not 0 < a < 1 for a in self.alphas) or len(self.alphas) == 0:
            raise ConfigError("alphas", "alpha grid values must lie in (0, 1)")
        if self.selection not in ("oracle", "data"):
            raise ConfigError("selection", f"use oracle or data, got {self.selection!r}")
        if self.oracle_mode not in ("per_rep", "average"):
            raise ConfigError("oracle_mode", f"use per_rep or average, got {self.oracle_mode!r}")
        if self.bandwidth not in ("cv", "yj"):
            raise ConfigError("bandwidth", f"use cv or yj, got {self.bandwidth!r}")
        if self.kernel not in KERNELS:
            raise ConfigError("kernel", f"unknown kernel {self.kernel!r}")
        if self.workers < 1:
            raise ConfigError("workers", "workers must be positive")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["alphas"] = list(self.alphas)
        return d


@dataclass
class MetricReport:
    scenario: str
    estimator: str
    beta: float | None
    J: int
    r: float
    reps: int
    mse: float
    bias: float
    failed_reps: int
    mse_se: float = math.nan
    bias_se: float = math.nan
    grid: np.ndarray = field(default=None, repr=False)
    per_point: np.ndarray = field(default=None, repr=False)
    selected: list = field(default_factory=list, repr=False)

    SUMMARY_FIELDS = ("scenario", "estimator", "beta", "J", "r", "reps", "mse", "bias",
                      "failed_reps")

    def summary(self) -> dict:
        return {k: getattr(self, k) for k in self.SUMMARY_FIELDS}


def mse_bias(errors: np.ndarray):
    """MSE and Bias of per-point errors (rows: replications, columns: x_l)."""
    e = np.asarray(errors, dtype=float)
    return float(np.mean(e * e)), float(np.mean(e))


# ----------------------------------------------------------------------------
# per-replication surfaces


def _rep_rng(seed: int, reps: int, index: int) -> np.random.Generator:
    child = np.random.SeedSequence(seed).spawn(reps)[index]
    return np.random.Generator(np.random.PCG64(child))


def _truth(sc: Scenario, spec: EstimatorSpec, xg):
    if spec.targets_quantile:
        return sc.true_quantile(spec.beta, xg)
    return sc.true_gamma(xg)


def _rp_surface(sample, kern, spec, xg, h_values, alphas):
    """Estimates of shape (len(h), len(alpha), L) for the RP family."""
    taus = spec.r ** np.arange(spec.J)
    weights = WEIGHT_RULES[spec.weight_rule](spec.J)
    orders = np.outer(alphas, taus)                   # (A, J)
    flat, inv = np.unique(orders.ravel(), return_inverse=True)
    inv = inv.reshape(orders.shape)
    out = np.full((len(h_values), len(alphas), xg.shape[0]), np.nan)
    for ih, h in enumerate(h_values):
        q_all, _ = quantile_grid(sample, kern, h, xg, flat)   # (L, n_orders)
        q = q_all[:, inv]                                    # (L, A, J)
        gamma, a_hat, _ = rp_arrays(q, spec.r, weights)
        if spec.targets_quantile:
            ratio = np.asarray(alphas)[None, :] / spec.beta
            est = extrapolate_arrays(q[..., 0], gamma, a_hat, ratio)
        else:
            est = gamma
        out[ih] = est.T
    return out


def _gp_cell(sample, kern, h, x, u, spec):
    try:
        e = threshold_exceedances(sample, kern, h, x, u)
        fit = gp_fit(e)
        if spec.targets_quantile:
            return gp_quantile(fit, e, spec.beta)
        return fit.gamma_hat
    except (ArithmeticError, ValueError, ExtremeQRError):
        # empty window or too few exceedances
        return math.nan


def _gp_surface(sample, kern, spec, xg, h_values, alphas):
    ys = np.sort(sample.ys)
    n = ys.shape[0]
    out = np.full((len(h_values), len(alphas), xg.shape[0]), np.nan)
    for ia, a in enumerate(alphas):
        # threshold: upper alpha-th sample quantile, floor(n alpha) points above it
        m = int(math.floor(n * a))
        if m < 1 or m >= n:
            continue
        u = ys[n - m - 1]
        for ih, h in enumerate(h_values):
            for il, x in enumerate(xg):
                out[ih, ia, il] = _gp_cell(sample, kern, h, x, u, spec)
    return out


def _oracle_surface(sample, sc, spec, xg, h_values, alphas, kern):
    """Cell estimates (n_cells, L) and the cell parameters [(h, alpha)]."""
    if spec.name in ("truth", "gamma_truth"):
        return _truth(sc, spec, xg)[None, :], [(math.nan, math.nan)]
    if spec.name == "RQ":
        est = np.full((len(h_values), xg.shape[0]), np.nan)
        for ih, h in enumerate(h_values):
            q, _ = quantile_grid(sample, kern, h, xg, [spec.beta])
            est[ih] = q[:, 0]
        return est, [(h, math.nan) for h in h_values]
    if spec.name in ("GP", "gamma_GP"):
        surf = _gp_surface(sample, kern, spec, xg, h_values, alphas)
    else:
        surf = _rp_surface(sample, kern, spec, xg, h_values, alphas)
    params = [(h, a) for h in h_values for a in alphas]
    return surf.reshape(-1, xg.shape[0]), params


def _data_point(sample, kern, spec, h, x):
    """Separate stability rule at one x: estimates over k = 1..n*-1."""
    win = local_window(sample, kern, h, x)
    n_star = win.n_star
    if win.is_empty or n_star < 5:
        return math.nan, None
    ks = np.arange(1, n_star)
    if spec.name in ("GP", "gamma_GP"):
        vals = []
        for k in ks:
            try:
                e = build_exceedances(sample, kern, h, x, int(k))
                fit = gp_fit(e)
                vals.append(gp_quantile(fit, e, spec.beta) if spec.targets_quantile
                            else fit.gamma_hat)
            except (ArithmeticError, ValueError, ExtremeQRError):
                vals.append(math.nan)
        vals = np.array(vals)
    else:
        weights = WEIGHT_RULES[spec.weight_rule](spec.J)
        _, gamma, q_tilde = rp_k_path(win, spec.J, spec.r, weights, spec.beta)
        vals = q_tilde if spec.targets_quantile else gamma
    try:
        k_sel, _ = select_k_separate(vals, ks, int(math.isqrt(n_star)))
    except ExtremeQRError:
        return math.nan, None
    return float(vals[k_sel - 1]), int(k_sel)


def _data_estimates(sample, sc, spec, xg, cfg, kern):
    if spec.name in ("truth", "gamma_truth"):
        return _truth(sc, spec, xg), (math.nan, None)
    h_grid = default_h_grid(sample, cfg.h_points, cfg.hmax_divisor)
    h = cv_bandwidth(sample, kern, h_grid)
    if cfg.bandwidth == "yj":
        h *= yu_jones_factor(spec.beta if spec.beta is not None else 0.5)
    if spec.name == "RQ":
        q, _ = quantile_grid(sample, kern, h, xg, [spec.beta])
        return q[:, 0], (h, None)
    est = np.array([_data_point(sample, kern, spec, h, x)[0] for x in xg])
    return est, (h, None)


def replicate(cfg: MCConfig, index: int):
    """One replication: returns ``(errors, params)`` where ``errors`` has one
    row per parameter cell (oracle mode) or a single row (data mode)."""
    sc = Scenario(cfg.scenario, cfg.n)
    spec = cfg.estimator
    kern = KERNELS[cfg.kernel]()
    rng = _rep_rng(cfg.seed, cfg.reps, index)
    sample = generate(sc, rng)
    xg = evaluation_points(cfg.L)
    truth = _truth(sc, spec, xg)
    if cfg.selection == "data":
        est, params = _data_estimates(sample, sc, spec, xg, cfg, kern)
        return (est - truth)[None, :], [params]
    h_values = default_h_grid(sample, cfg.h_points, cfg.hmax_divisor)
    est, params = _oracle_surface(sample, sc, spec, xg, h_values, cfg.alphas, kern)
    return est - truth[None, :], params


def _run_one(args):
    cfg, index = args
    return replicate(cfg, index)


def _replications(cfg: MCConfig):
    jobs = [(cfg, i) for i in range(cfg.reps)]
    if cfg.workers == 1:
        return [_run_one(j) for j in jobs]
    workers = min(cfg.workers, os.cpu_count() or 1, cfg.reps)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def _cell_mse(errors):
    """Per-cell MSE over x; NaN when any point of the cell is invalid."""
    with np.errstate(invalid="ignore"):
        return np.mean(errors * errors, axis=1)


def run_mc(cfg: MCConfig) -> MetricReport:
    """Replicate, select parameters, and aggregate MSE/Bias over the grid.

    Oracle selection picks, per replication, the cell with the smallest MSE
    (``oracle_mode='average'`` picks one cell index from the surface averaged
    over replications). A replication without any fully valid cell is
    counted in ``failed_reps`` and left out of the averages.
    """
    results = _replications(cfg)
    rows, selected, failed = [], [], 0
    if cfg.selection == "oracle" and cfg.oracle_mode == "average":
        stack = np.stack([_cell_mse(e) for e, _ in results])       # (reps, cells)
        valid_all = np.all(np.isfinite(stack), axis=0)
        pick = None
        if np.any(valid_all):
            mean = np.where(valid_all, np.mean(stack, axis=0), np.inf)
            pick = int(np.argmin(mean))
        for errors, params in results:
            if pick is None:
                failed += 1
                continue
            rows.append(errors[pick])
            selected.append(params[pick])
    else:
        for errors, params in results:
            m = _cell_mse(errors)
            if not np.any(np.isfinite(m)):
                failed += 1
                continue
            i = int(np.nanargmin(m))
            rows.append(errors[i])
            selected.append(params[i])
    spec = cfg.estimator
    grid = evaluation_points(cfg.L)
    if rows:
        per_point = np.vstack(rows)
        mse, bias = mse_bias(per_point)
        rep_mse = np.mean(per_point * per_point, axis=1)
        rep_bias = np.mean(per_point, axis=1)
        k = per_point.shape[0]
        mse_se = float(np.std(rep_mse, ddof=1) / math.sqrt(k)) if k > 1 else math.nan
        bias_se = float(np.std(rep_bias, ddof=1) / math.sqrt(k)) if k > 1 else math.nan
    else:
        per_point = np.zeros((0, cfg.L))
        mse = bias = mse_se = bias_se = math.nan
    return MetricReport(scenario=cfg.scenario, estimator=spec.name, beta=spec.beta, J=spec.J,
                        r=spec.r, reps=cfg.reps, mse=mse, bias=bias, failed_reps=failed,
                        mse_se=mse_se, bias_se=bias_se, grid=grid, per_point=per_point,
                        selected=selected)


def asymptotic_standardized_errors(reps: int = 200, n: int = 10_000, x: float = 0.5,
                                   seed: int = 0, kernel: str = "triweight",
                                   normalise: str = "quantile"):
    """Standardized intermediate-quantile errors at a fixed x in the Student
    scenario with alpha_n = n^-0.3 and h = n^-0.2.

    ``normalise='quantile'`` returns sqrt(n h alpha)(q_hat/q - 1), whose
    limiting variance is ||K||^2 gamma^2 / g when a(q)/q -> gamma.
    ``normalise='scale'`` returns sqrt(n h alpha)(q_hat - q)/a(q) with the
    exact auxiliary function a(q) = sigma(x) S_U(u)/f_U(u), u = S_U^{-1}(alpha);
    its limiting variance is ||K||^2 / g.
    """
    if normalise not in ("quantile", "scale"):
        raise DomainError(f"normalise must be quantile or scale, got {normalise!r}")
    sc = Scenario("student", n)
    kern = KERNELS[kernel]()
    alpha = n ** -0.3
    h = n ** -0.2
    q_true = float(sc.true_quantile(alpha, x))
    df = float(student_df(x))
    u = stats.t.isf(alpha, df)
    a_true = float(scale(x)) * alpha / float(stats.t.pdf(u, df))
    out = np.empty(reps)
    root = math.sqrt(n * h * alpha)
    for i in range(reps):
        sample = generate(sc, _rep_rng(seed, reps, i))
        q_hat = local_window(sample, kern, h, x).quantile(alpha)
        if normalise == "quantile":
            out[i] = root * (q_hat / q_true - 1.0)
        else:
            out[i] = root * (q_hat - q_true) / a_true
    return out


__all__.append("asymptotic_standardized_errors")
