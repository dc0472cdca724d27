"""Data-driven smoothing-parameter selection: leave-one-out cross-validated
bandwidth, the Yu-Jones rescaling for quantile levels, and the separate and
simultaneous (h, k) stability rules.

Stability rules slide a window over consecutive candidate values, compute
the sample standard deviation (ddof=1) of the estimates in each window and
return the *first* element of the least variable window; ties go to the
earlier window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .conditional import Sample
from .errors import DomainError, SelectionError
from .kernel import KernelSpec, scaled_eval

__all__ = [
    "SelectionGrid",
    "SelectionResult",
    "CVTrace",
    "default_h_grid",
    "refined_h_grid",
    "cv_criterion",
    "cv_bandwidth",
    "yu_jones_factor",
    "yu_jones_bandwidth",
    "scan_windows",
    "select_k_separate",
    "select_hk_simultaneous",
]


TIE_RTOL = 1e-12


def _sqrt_window(n_star: int) -> int:
    return int(math.isqrt(int(n_star)))


@dataclass(frozen=True)
class SelectionGrid:
    h_values: tuple
    window_h: int = 10
    window_k: Callable[[int], int] = field(default=_sqrt_window, repr=False)

    def __post_init__(self):
        h = tuple(float(v) for v in self.h_values)
        if len(h) == 0:
            raise DomainError("bandwidth grid is empty")
        if any(not v > 0 for v in h) or any(b <= a for a, b in zip(h, h[1:])):
            raise DomainError("bandwidth grid must be positive and strictly increasing")
        if self.window_h < 1:
            raise DomainError("window_h must be positive")
        object.__setattr__(self, "h_values", h)


@dataclass(frozen=True)
class SelectionResult:
    h_selected: float
    k_selected: int
    estimate: float
    stability_score: float
    trace: list = field(default_factory=list, repr=False)


def _h_min(xs: np.ndarray) -> float:
    if xs.shape[1] == 1:
        sx = np.sort(xs[:, 0])
        return float(np.max(np.diff(sx)))
    d = np.sqrt(np.sum((xs[:, None, :] - xs[None, :, :]) ** 2, axis=-1))
    np.fill_diagonal(d, np.inf)
    return float(np.max(np.min(d, axis=1)))


def default_h_grid(s: Sample, points: int = 50, hmax_divisor: float = 2.0) -> np.ndarray:
    """``points`` bandwidths evenly spread between the largest gap of the
    design and range/``hmax_divisor`` (per-coordinate max range when p > 1)."""
    if s.n < 2:
        raise DomainError("need at least two design points")
    h_min = _h_min(s.xs)
    h_max = float(np.max(np.ptp(s.xs, axis=0))) / hmax_divisor
    if not h_max > h_min:
        raise DomainError(f"degenerate bandwidth range [{h_min}, {h_max}]")
    return np.linspace(h_min, h_max, points)


def refined_h_grid(h_cv: float, h_yj: float, h_min: float = 0.0, points: int = 50) -> np.ndarray:
    """``points`` bandwidths between min(h_cv, h_yj - h_cv) and h_yj + 2 h_cv,
    with the lower end floored at ``h_min``."""
    lo = max(min(h_cv, h_yj - h_cv), h_min)
    hi = h_yj + 2.0 * h_cv
    if not hi > lo > 0:
        raise DomainError(f"degenerate refined grid [{lo}, {hi}]")
    return np.linspace(lo, hi, points)


# ----------------------------------------------------------------------------
# cross-validation


@dataclass(frozen=True)
class CVTrace:
    h_values: tuple
    criterion: tuple
    skipped_pairs: tuple
    h_cv: float


def _pairwise_diff(xs: np.ndarray):
    d = xs[:, None, :] - xs[None, :, :]
    return d[..., 0] if xs.shape[1] == 1 else d


def cv_criterion(s: Sample, k: KernelSpec, h: float):
    """Leave-one-out criterion sum_i sum_j (1(Y_i >= Y_j) - F_{-i}(Y_j | X_i))^2.

    Returns ``(value, skipped)``; rows i whose leave-one-out window is empty
    contribute nothing and their n pairs are counted in ``skipped``. The
    value is NaN when every row is empty.
    """
    W = np.asarray(scaled_eval(k, h, _pairwise_diff(s.xs)), dtype=float)
    np.fill_diagonal(W, 0.0)
    denom = W.sum(axis=1)
    ok = denom > 0
    y = s.ys
    above = (y[:, None] > y[None, :]).astype(float)  # [m, j] = 1{Y_m > Y_j}
    ge = (y[:, None] >= y[None, :]).astype(float)     # [i, j] = 1{Y_i >= Y_j}
    skipped = int(np.sum(~ok)) * s.n
    if not np.any(ok):
        return math.nan, skipped
    surv = (W[ok] @ above) / denom[ok, None]
    resid = ge[ok] - surv
    return float(np.sum(resid * resid)), skipped


def cv_bandwidth(s: Sample, k: KernelSpec, grid: SelectionGrid | Sequence[float],
                 return_trace: bool = False):
    """Grid minimizer of :func:`cv_criterion` (first minimizer on ties)."""
    if s.n < 3:
        raise DomainError("cross-validation needs n >= 3")
    h_values = grid.h_values if isinstance(grid, SelectionGrid) else tuple(float(h) for h in grid)
    values, skipped = [], []
    for h in h_values:
        v, sk = cv_criterion(s, k, h)
        values.append(v)
        skipped.append(sk)
    arr = np.array(values)
    if not np.any(np.isfinite(arr)):
        raise SelectionError("every candidate bandwidth has only empty leave-one-out windows",
                             trace=list(zip(h_values, skipped)))
    h_cv = float(h_values[int(np.nanargmin(arr))])
    if return_trace:
        return h_cv, CVTrace(tuple(h_values), tuple(values), tuple(skipped), h_cv)
    return h_cv


# ----------------------------------------------------------------------------
# Yu-Jones


def yu_jones_factor(beta: float) -> float:
    """(beta (1 - beta) / phi(Phi^{-1}(beta))^2)^(1/5)."""
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    # evaluate on the lower half so factor(beta) == factor(1 - beta) exactly
    b = min(beta, 1.0 - beta)
    z = stats.norm.ppf(b)
    phi = stats.norm.pdf(z)
    return float((beta * (1.0 - beta) / (phi * phi)) ** 0.2)


def yu_jones_bandwidth(h_cv: float, beta: float) -> float:
    if not h_cv > 0:
        raise DomainError(f"h_cv must be positive, got {h_cv!r}")
    return h_cv * yu_jones_factor(beta)


# ----------------------------------------------------------------------------
# stability scans


def scan_windows(values: Sequence[float], window: int):
    """Slide ``window`` over ``values``; windows containing a non-finite entry
    are skipped. Returns ``(start, score, scores)`` with ``scores[i]`` NaN for
    invalid windows, or ``(None, nan, scores)`` when no window is valid."""
    v = np.asarray(values, dtype=float)
    m = v.shape[0]
    if window < 2:
        raise DomainError("stability window must hold at least 2 values")
    n_win = m - window + 1
    scores = np.full(max(n_win, 0), np.nan)
    best, best_score = None, math.inf
    for i in range(max(n_win, 0)):
        chunk = v[i:i + window]
        if not np.all(np.isfinite(chunk)):
            continue
        sc = float(np.std(chunk, ddof=1))
        scores[i] = sc
        # scores equal up to rounding count as ties, which go to the earlier window
        if best is None or sc < best_score - TIE_RTOL * best_score:
            best, best_score = i, sc
    if best is None:
        return None, math.nan, scores
    return best, best_score, scores


def _evaluate(estimates, keys):
    out = []
    for key in keys:
        try:
            val = estimates(key)
        except (ArithmeticError, ValueError, LookupError, DomainError):
            val = math.nan
        out.append(math.nan if val is None else float(val))
    return out


def select_k_separate(estimates: Callable[[int], float] | Sequence[float],
                      k_range: Sequence[int], window: int):
    """Stability choice of k. ``estimates`` is a function of k (NaN, None or
    a raised domain error mark a degenerate k) or a sequence aligned with
    ``k_range``. Returns ``(k, score)``."""
    k_list = [int(k) for k in k_range]
    if window > len(k_list):
        raise SelectionError(f"window {window} exceeds the {len(k_list)} candidate k values")
    if callable(estimates):
        values = _evaluate(estimates, k_list)
    else:
        values = [float(v) for v in estimates]
        if len(values) != len(k_list):
            raise DomainError("estimates and k_range differ in length")
    start, score, _ = scan_windows(values, window)
    if start is None:
        raise SelectionError(f"fewer than {window} consecutive valid k values",
                             trace=list(zip(k_list, values)))
    return k_list[start], score


def select_hk_simultaneous(estimates: Callable[[float, int], float], grid: SelectionGrid,
                           n_star_of_h: Callable[[float], int]) -> SelectionResult:
    """Two-stage rule: for each h pick k_h by :func:`select_k_separate` over
    k = 1..n*-1 with window floor(sqrt(n*)); then pick h by the same scan over
    the estimates at (h, k_h), with ``grid.window_h`` consecutive usable h."""
    trace = []
    picks = []
    for h in grid.h_values:
        n_star = int(n_star_of_h(h))
        entry = {"h": h, "n_star": n_star}
        try:
            wk = grid.window_k(n_star)
            k_h, score = select_k_separate(lambda kk: estimates(h, kk), range(1, n_star), wk)
            est = float(estimates(h, k_h))
            entry.update(k=k_h, k_score=score, estimate=est, window_k=wk)
            picks.append((k_h, est))
        except (SelectionError, DomainError, ValueError, ArithmeticError) as exc:
            entry.update(error=str(exc))
            picks.append((None, math.nan))
        trace.append(entry)
    usable = sum(1 for k_h, _ in picks if k_h is not None)
    if usable < grid.window_h:
        raise SelectionError(f"only {usable} usable bandwidths, need {grid.window_h}", trace=trace)
    if grid.window_h == 1:
        ok = [i for i, (k_h, _) in enumerate(picks) if k_h is not None]
        i = ok[0]
        return SelectionResult(grid.h_values[i], picks[i][0], picks[i][1], 0.0, trace)
    start, score, scores = scan_windows([e for _, e in picks], grid.window_h)
    if start is None:
        raise SelectionError(f"no run of {grid.window_h} consecutive usable bandwidths",
                             trace=trace)
    for i, sc in enumerate(scores):
        trace[i]["h_score"] = float(sc)
    k_sel, est = picks[start]
    return SelectionResult(h_selected=grid.h_values[start], k_selected=k_sel, estimate=est,
                           stability_score=score, trace=trace)
