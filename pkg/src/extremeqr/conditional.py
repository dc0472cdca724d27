"""Kernel estimators of the design density, the conditional survival function
and conditional quantiles (generalized inverse of the survival estimate).

All survival values are computed from one reverse cumulative sum of kernel
weights over the responses sorted in ascending order, so the scalar window
path and the batched grid path return bit-identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError, EmptyWindowError, InvalidBandwidthError
from .kernel import KernelSpec, scaled_eval

__all__ = [
    "Sample",
    "LocalWindow",
    "kernel_weights",
    "local_window",
    "density_estimate",
    "survival_estimate",
    "quantile_estimate",
    "quantile_grid",
]


@dataclass(frozen=True)
class Sample:
    """Paired observations; ``xs`` has shape (n, p) and ``ys`` shape (n,)."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.ndim == 1:
            xs = xs[:, None]
        ys = np.asarray(self.ys, dtype=float).reshape(-1)
        if xs.ndim != 2:
            raise DataError("covariates must be a vector or an (n, p) array")
        if xs.shape[0] != ys.shape[0]:
            raise DataError(f"got {xs.shape[0]} covariate rows but {ys.shape[0]} responses")
        if ys.shape[0] < 1:
            raise DataError("sample is empty")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise DataError("sample contains non-finite values")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.ys.shape[0]

    @property
    def p(self) -> int:
        return self.xs.shape[1]

    def transform_y(self, loc: float = 0.0, scale: float = 1.0) -> "Sample":
        return Sample(self.xs, loc + scale * self.ys)


def _as_point(s: Sample, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != s.p:
        raise DataError(f"query point has dimension {x.shape[0]}, sample has p={s.p}")
    return x


def _differences(s: Sample, x: np.ndarray) -> np.ndarray:
    d = x[None, :] - s.xs
    return d[:, 0] if s.p == 1 else d


def _distances(s: Sample, x: np.ndarray) -> np.ndarray:
    d = x[None, :] - s.xs
    return np.abs(d[:, 0]) if s.p == 1 else np.sqrt(np.sum(d * d, axis=1))


def kernel_weights(s: Sample, k: KernelSpec, h: float, x) -> np.ndarray:
    """K_h(x - X_i) for every observation."""
    if not h > 0:
        raise InvalidBandwidthError(f"bandwidth must be positive, got {h!r}")
    x = _as_point(s, x)
    return np.asarray(scaled_eval(k, h, _differences(s, x)), dtype=float).reshape(-1)


def _tie_last(sorted_y: np.ndarray) -> np.ndarray:
    """Index of the last member of each element's tie group."""
    m = sorted_y.shape[0]
    if m == 0:
        return np.zeros(0, dtype=np.intp)
    is_last = np.ones(m, dtype=bool)
    is_last[:-1] = sorted_y[1:] != sorted_y[:-1]
    last_positions = np.flatnonzero(is_last)
    group = np.cumsum(np.r_[0, is_last[:-1].astype(np.intp)])
    return last_positions[group]


def _tail_sums(sorted_w: np.ndarray) -> np.ndarray:
    """tail[i] = sum(sorted_w[i:]) along the last axis, with a trailing zero."""
    rev = np.cumsum(sorted_w[..., ::-1], axis=-1)[..., ::-1]
    pad = np.zeros(sorted_w.shape[:-1] + (1,))
    return np.concatenate([rev, pad], axis=-1)


@dataclass(frozen=True)
class LocalWindow:
    """Observations in the closed ball B(x, h) with their kernel weights.

    ``sorted_y``/``sorted_w`` hold the in-window responses in ascending order;
    ``survival_after[i]`` is the estimated survival function evaluated at
    ``sorted_y[i]`` (ties merged onto the common jump).
    """

    x: np.ndarray
    h: float
    indices: np.ndarray
    weights: np.ndarray
    sorted_y: np.ndarray
    sorted_w: np.ndarray
    tail: np.ndarray
    survival_after: np.ndarray

    @property
    def n_star(self) -> int:
        return int(self.indices.shape[0])

    @property
    def total_weight(self) -> float:
        return float(self.tail[0]) if self.tail.shape[0] else 0.0

    @property
    def is_empty(self) -> bool:
        return not self.total_weight > 0

    def _require(self):
        if self.is_empty:
            raise EmptyWindowError(self.x.tolist(), self.h)

    def survival(self, y):
        """Weighted fraction of in-window responses strictly above ``y``."""
        self._require()
        y = np.asarray(y, dtype=float)
        pos = np.searchsorted(self.sorted_y, y, side="right")
        out = self.tail[pos] / self.tail[0]
        return float(out) if out.ndim == 0 else out

    def quantile(self, alpha):
        """inf{t : survival(t) <= alpha}; always one of the in-window responses."""
        self._require()
        alpha = np.asarray(alpha, dtype=float)
        # survival_after is nonincreasing, so the count of entries above alpha
        # is the position of the first entry at or below it.
        idx = np.sum(self.survival_after[None, :] > alpha.reshape(-1, 1), axis=1)
        idx = np.minimum(idx, self.sorted_y.shape[0] - 1)
        out = self.sorted_y[idx].reshape(alpha.shape)
        return float(out) if out.ndim == 0 else out


def local_window(s: Sample, k: KernelSpec, h: float, x) -> LocalWindow:
    x = _as_point(s, x)
    w_all = kernel_weights(s, k, h, x)
    dist = _distances(s, x)
    indices = np.flatnonzero(dist <= h)
    w = w_all[indices]
    order = np.argsort(s.ys[indices], kind="stable")
    sorted_y = s.ys[indices][order]
    sorted_w = w[order]
    tail = _tail_sums(sorted_w)
    if tail[0] > 0:
        after = tail[1:] / tail[0]
        after = after[_tie_last(sorted_y)]
    else:
        after = np.zeros_like(sorted_y)
    return LocalWindow(x=x, h=float(h), indices=indices, weights=w, sorted_y=sorted_y,
                       sorted_w=sorted_w, tail=tail, survival_after=after)


def density_estimate(s: Sample, k: KernelSpec, h: float, x) -> float:
    """(1/n) sum_i K_h(x - X_i); zero for an empty window."""
    return local_window(s, k, h, x).total_weight / s.n


def survival_estimate(s: Sample, k: KernelSpec, h: float, x, y):
    return local_window(s, k, h, x).survival(y)


def quantile_estimate(s: Sample, k: KernelSpec, h: float, x, alpha):
    if np.any(np.asarray(alpha) <= 0) or np.any(np.asarray(alpha) >= 1):
        raise DomainError(f"quantile order must lie in (0, 1), got {alpha!r}")
    return local_window(s, k, h, x).quantile(alpha)


def quantile_grid(s: Sample, k: KernelSpec, h: float, x_grid, alphas):
    """Kernel quantiles for many query points and orders at once.

    Returns ``(q, n_star)`` where ``q`` has shape (len(x_grid), len(alphas))
    with NaN rows for empty windows and ``n_star`` counts observations in
    each closed window. Values agree exactly with :func:`quantile_estimate`.
    """
    if not h > 0:
        raise InvalidBandwidthError(f"bandwidth must be positive, got {h!r}")
    xg = np.asarray(x_grid, dtype=float)
    if xg.ndim == 1:
        xg = xg[:, None] if s.p == 1 else xg[None, :]
    alphas = np.asarray(alphas, dtype=float).reshape(-1)
    order = np.argsort(s.ys, kind="stable")
    sy = s.ys[order]
    sx = s.xs[order]
    diff = xg[:, None, :] - sx[None, :, :]
    if s.p == 1:
        diff = diff[..., 0]
        dist = np.abs(diff)
    else:
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
    w = np.asarray(scaled_eval(k, h, diff), dtype=float)
    # exclude everything outside the closed ball so sums match the window path
    w = np.where(dist <= h, w, 0.0)
    n_star = np.sum(dist <= h, axis=1)
    tail = _tail_sums(w)
    total = tail[:, :1]
    ok = total[:, 0] > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        after = tail[:, 1:] / total
    after = after[:, _tie_last(sy)]
    q = np.full((xg.shape[0], alphas.shape[0]), np.nan)
    if np.any(ok):
        a = after[ok]
        idx = np.sum(a[:, None, :] > alphas[None, :, None], axis=2)
        idx = np.minimum(idx, sy.shape[0] - 1)
        q[ok] = sy[idx]
    return q, n_star
