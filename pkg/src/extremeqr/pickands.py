"""Refined Pickands estimators of the conditional extreme-value index and of
the scale a(q(alpha|x)|x), and the extrapolated extreme conditional quantile

    q_tilde(beta|x) = q_hat(alpha|x) + K_{gamma_hat}(alpha/beta) a_hat.

Every estimator accepts either a :class:`~extremeqr.conditional.Sample`
(kernel quantiles at ``x`` with bandwidth ``h``) or a quantile oracle, a
callable mapping orders in (0, 1) to quantiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .conditional import Sample, local_window
from .errors import DegenerateSpacingError, DomainError, InvalidWeightsError
from .evt_core import FractionLevels, k_fn
from .kernel import KernelSpec

__all__ = [
    "RPConfig",
    "RPEstimate",
    "rp1_weights",
    "rp2_weights",
    "rp_quantile_orders",
    "rp_arrays",
    "rp_from_quantiles",
    "extrapolate_arrays",
    "rp_gamma",
    "rp_scale",
    "extrapolate",
    "rp_extreme_quantile",
]


def rp1_weights(J: int) -> tuple:
    """Constant weights pi_j = 1/(J-2)."""
    if J < 3:
        raise InvalidWeightsError(f"refined Pickands weights need J >= 3, got {J}")
    return tuple(float(Fraction(1, J - 2)) for _ in range(J - 2))


def rp2_weights(J: int) -> tuple:
    """Linear weights pi_j = 2j / ((J-1)(J-2))."""
    if J < 3:
        raise InvalidWeightsError(f"refined Pickands weights need J >= 3, got {J}")
    return tuple(float(Fraction(2 * j, (J - 1) * (J - 2))) for j in range(1, J - 1))


WEIGHT_RULES = {"rp1": rp1_weights, "rp2": rp2_weights}


@dataclass(frozen=True)
class RPConfig:
    alpha: float
    J: int = 3
    r: float = 1.0 / 3.0
    weights: tuple = field(default=None)

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if int(self.J) != self.J or self.J < 3:
            raise DomainError(f"J must be an integer >= 3, got {self.J!r}")
        if not 0 < self.r < 1:
            raise DomainError(f"r must lie in (0, 1), got {self.r!r}")
        weights = self.weights if self.weights is not None else rp1_weights(self.J)
        weights = tuple(float(w) for w in weights)
        if len(weights) != self.J - 2:
            raise InvalidWeightsError(f"expected {self.J - 2} weights, got {len(weights)}")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise InvalidWeightsError(f"weights sum to {math.fsum(weights)!r}, not 1")
        object.__setattr__(self, "J", int(self.J))
        object.__setattr__(self, "weights", weights)

    @classmethod
    def named(cls, rule: str, alpha: float, J: int = 3, r: float = 1.0 / 3.0) -> "RPConfig":
        try:
            weights = WEIGHT_RULES[rule](J)
        except KeyError:
            raise InvalidWeightsError(f"unknown weight rule {rule!r}; use rp1 or rp2") from None
        return cls(alpha=alpha, J=J, r=r, weights=weights)

    @property
    def levels(self) -> FractionLevels:
        return FractionLevels.geometric(self.r, self.J)


@dataclass(frozen=True)
class RPEstimate:
    """Output of the refined Pickands chain at one query point.

    When ``degenerate`` is true ``gamma_hat`` and ``a_hat`` are None and
    ``collapsed`` holds the 1-based index of the first null spacing.
    """

    alpha: float
    anchor_quantile: float
    quantiles: tuple
    quantile_spacings: tuple
    gamma_hat: float | None
    a_hat: float | None
    degenerate: bool = False
    collapsed: int | None = None

    def require(self) -> "RPEstimate":
        if self.degenerate:
            raise DegenerateSpacingError(self.collapsed, self.quantile_spacings)
        return self


def rp_quantile_orders(cfg: RPConfig) -> np.ndarray:
    """tau_j * alpha for j = 1..J."""
    return cfg.alpha * cfg.levels.as_array()


def rp_arrays(q: np.ndarray, r: float, weights: Sequence[float]):
    """Vectorized refined Pickands chain over the last axis of ``q``.

    ``q[..., j-1]`` holds q(tau_j alpha). Returns ``(gamma_hat, a_hat, bad)``
    where ``bad`` is the 1-based index of the first null (or wrongly signed)
    spacing and 0 when the estimate is valid; invalid entries are NaN.
    """
    q = np.asarray(q, dtype=float)
    weights = np.asarray(weights, dtype=float)
    J = q.shape[-1]
    if weights.shape[0] != J - 2:
        raise InvalidWeightsError(f"expected {J - 2} weights, got {weights.shape[0]}")
    spacings = q[..., :-1] - q[..., 1:]
    bad_mask = ~(np.isfinite(spacings) & (spacings < 0))
    bad = np.where(np.any(bad_mask, axis=-1), np.argmax(bad_mask, axis=-1) + 1, 0)
    ok = bad == 0
    safe = np.where(bad_mask, -1.0, spacings)
    log_ratio = np.log(safe[..., :-1] / safe[..., 1:])
    acc = np.zeros(q.shape[:-1])
    for j in range(J - 2):
        acc = acc + weights[j] * log_ratio[..., j]
    gamma = acc / math.log(r)
    kr = k_fn(gamma, r)
    acc = np.zeros(q.shape[:-1])
    for j in range(J - 2):
        acc = acc + weights[j] * r ** (gamma * (j + 1)) * safe[..., j]
    a_hat = acc / kr
    gamma = np.where(ok, gamma, np.nan)
    a_hat = np.where(ok, a_hat, np.nan)
    return gamma, a_hat, bad


def rp_from_quantiles(quantiles: Sequence[float], cfg: RPConfig) -> RPEstimate:
    """Refined Pickands estimates from q(tau_1 alpha), ..., q(tau_J alpha)."""
    q = np.asarray(quantiles, dtype=float).reshape(-1)
    if q.shape[0] != cfg.J:
        raise DomainError(f"expected {cfg.J} quantiles, got {q.shape[0]}")
    spacings = q[:-1] - q[1:]
    common = dict(alpha=cfg.alpha, anchor_quantile=float(q[0]), quantiles=tuple(q.tolist()),
                  quantile_spacings=tuple(spacings.tolist()))
    gamma, a_hat, bad = rp_arrays(q, cfg.r, cfg.weights)
    if bad:
        return RPEstimate(gamma_hat=None, a_hat=None, degenerate=True, collapsed=int(bad),
                          **common)
    return RPEstimate(gamma_hat=float(gamma), a_hat=float(a_hat), **common)


def extrapolate_arrays(anchor_q, gamma, a_hat, ratio):
    """Vectorized q_hat(alpha) + K_gamma(alpha/beta) a_hat; ``ratio`` = alpha/beta."""
    gamma = np.asarray(gamma, dtype=float)
    g = np.where(np.isfinite(gamma), gamma, 0.0)
    return np.where(np.isfinite(gamma), anchor_q + k_fn(g, ratio) * a_hat, np.nan)


def _quantile_source(source, kernel, h, x) -> Callable:
    if isinstance(source, Sample):
        if kernel is None or h is None or x is None:
            raise ValueError("kernel, h and x are required when estimating from a sample")
        return local_window(source, kernel, h, x).quantile
    if callable(source):
        return lambda a: np.array([source(float(t)) for t in np.atleast_1d(a)])
    raise TypeError("source must be a Sample or a quantile function")


def rp_gamma(source: Sample | Callable, cfg: RPConfig, kernel: KernelSpec | None = None,
             h: float | None = None, x=None) -> RPEstimate:
    """Refined Pickands estimate of the extreme-value index at ``x``.

    The returned estimate also carries the matching scale estimate, so a
    separate :func:`rp_scale` call is only needed for a different gamma.
    """
    qfun = _quantile_source(source, kernel, h, x)
    return rp_from_quantiles(qfun(rp_quantile_orders(cfg)), cfg)


def rp_scale(source: Sample | Callable, cfg: RPConfig, gamma_hat: float,
             kernel: KernelSpec | None = None, h: float | None = None, x=None) -> float:
    if not math.isfinite(gamma_hat):
        raise DomainError("gamma_hat must be finite")
    qfun = _quantile_source(source, kernel, h, x)
    q = np.asarray(qfun(rp_quantile_orders(cfg)), dtype=float)
    spacings = q[:-1] - q[1:]
    head = spacings[: cfg.J - 2]
    bad = ~(np.isfinite(head) & (head < 0))
    if np.any(bad):
        raise DegenerateSpacingError(int(np.argmax(bad)) + 1, tuple(spacings.tolist()))
    acc = 0.0
    for j in range(cfg.J - 2):
        acc = acc + cfg.weights[j] * cfg.r ** (gamma_hat * (j + 1)) * head[j]
    return float(acc / k_fn(gamma_hat, cfg.r))


def extrapolate(anchor: RPEstimate, beta: float, alpha: float | None = None) -> float:
    """q_hat(alpha) + K_{gamma_hat}(alpha / beta) a_hat for beta <= alpha."""
    alpha = anchor.alpha if alpha is None else alpha
    if not 0 < beta <= alpha:
        raise DomainError(f"extrapolation needs 0 < beta <= alpha, got beta={beta!r}, alpha={alpha!r}")
    anchor.require()
    return anchor.anchor_quantile + k_fn(anchor.gamma_hat, alpha / beta) * anchor.a_hat


def rp_extreme_quantile(source, cfg: RPConfig, beta: float, kernel=None, h=None, x=None) -> float:
    return extrapolate(rp_gamma(source, cfg, kernel, h, x), beta)


def rp_k_path(window, J: int = 3, r: float = 1.0 / 3.0, weights: Sequence[float] | None = None,
              beta: float | None = None):
    """Refined Pickands estimates along alpha = k/n*, k = 1..n*-1, in one window.

    Returns ``(ks, gamma_hat, q_tilde)``; ``q_tilde`` is None when ``beta`` is
    None and is NaN where alpha < beta or the spacings collapse.
    """
    weights = rp1_weights(J) if weights is None else weights
    n_star = window.n_star
    ks = np.arange(1, max(n_star, 1))
    if ks.shape[0] == 0 or window.is_empty:
        empty = np.zeros(0)
        return ks, empty, (None if beta is None else empty)
    alphas = ks / n_star
    taus = r ** np.arange(J)
    q = np.asarray(window.quantile(np.outer(alphas, taus).ravel())).reshape(ks.shape[0], J)
    gamma, a_hat, _ = rp_arrays(q, r, weights)
    if beta is None:
        return ks, gamma, None
    ratio = np.maximum(alphas / beta, 1.0)
    q_tilde = np.where(alphas >= beta, extrapolate_arrays(q[:, 0], gamma, a_hat, ratio), np.nan)
    return ks, gamma, q_tilde


__all__.append("rp_k_path")
