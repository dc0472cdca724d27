"""Brute-force reference implementations used as test oracles.

These are deliberately slow and written without reuse of package internals:
plain Python loops, exact rational arithmetic for standard deviations.
"""

import math
from fractions import Fraction


def exact_std(values):
    """Sample standard deviation (m - 1 denominator), variance in exact rationals."""
    fr = [Fraction(v) for v in values]
    mean = sum(fr) / len(fr)
    var = sum((v - mean) ** 2 for v in fr) / (len(fr) - 1)
    return math.sqrt(var)


def _exact_var(values):
    fr = [Fraction(v) for v in values]
    mean = sum(fr) / len(fr)
    return sum((v - mean) ** 2 for v in fr) / (len(fr) - 1)


def best_window(values, window):
    """Start index and std of the lowest-variance run of ``window`` finite values;
    first start wins ties. Variances are compared exactly."""
    best, best_var = None, None
    for start in range(len(values) - window + 1):
        chunk = values[start:start + window]
        if any(v is None or not math.isfinite(v) for v in chunk):
            continue
        var = _exact_var(chunk)
        if best_var is None or var < best_var:
            best, best_var = start, var
    if best is None:
        return None, None
    return best, math.sqrt(best_var)


def select_k(values, ks, window):
    start, score = best_window(values, window)
    return (None, None) if start is None else (ks[start], score)


def select_hk(surface, h_values, n_stars, window_h):
    """surface[i][k - 1] holds the estimate at (h_values[i], k)."""
    picks = []
    for i, h in enumerate(h_values):
        ks = list(range(1, n_stars[i]))
        wk = math.isqrt(n_stars[i])
        if wk < 2 or wk > len(ks):
            picks.append((None, math.nan))
            continue
        k, _ = select_k([surface[i][k - 1] for k in ks], ks, wk)
        picks.append((k, math.nan if k is None else surface[i][k - 1]))
    usable = sum(1 for k, _ in picks if k is not None)
    if usable < window_h:
        return None
    start, score = best_window([e for _, e in picks], window_h)
    if start is None:
        return None
    return h_values[start], picks[start][0], picks[start][1], score


def cv_criterion(xs, ys, kernel, h):
    """Triple loop leave-one-out CV criterion; None when every row is empty."""
    n = len(ys)
    total, any_row = 0.0, False
    for i in range(n):
        w = [0.0 if m == i else kernel((xs[i] - xs[m]) / h) / h for m in range(n)]
        den = sum(w)
        if den <= 0:
            continue
        any_row = True
        for j in range(n):
            surv = sum(w[m] for m in range(n) if ys[m] > ys[j]) / den
            total += ((1.0 if ys[i] >= ys[j] else 0.0) - surv) ** 2
    return total if any_row else None
