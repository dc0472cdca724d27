"""The K_z function family and the asymptotic covariance algebra of the
refined Pickands estimator.

K_z(u) = int_1^u v^(z-1) dv = (u^z - 1)/z  (log u at z = 0)
K'_z(u) = dK_z(u)/dz = int_1^u v^(z-1) log v dv
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InvalidWeightsError

__all__ = [
    "FractionLevels",
    "TailIndex",
    "k_fn",
    "k_fn_prime",
    "k_fn_inverse",
    "remainder_b",
    "sigma_matrix",
    "sigma_tilde_matrix",
    "v_matrix",
    "rp_design_matrix",
    "rp_covariance",
    "extrapolation_variance_factor",
    "extrapolation_variance",
]

# Series branch switch on |z log u|; the closed forms lose about
# -log10(|z log u|) digits to cancellation below it.
SERIES_SWITCH = 1e-4
# K' cancels twice as badly (w e^w - expm1(w) ~ w^2/2), so its series runs
# further out with more terms.
PRIME_SERIES_SWITCH = 0.05
_PRIME_COEFS = tuple((m + 1) / math.factorial(m + 2) for m in range(12))


@dataclass(frozen=True)
class TailIndex:
    gamma: float

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise DomainError(f"tail index must be finite, got {self.gamma!r}")

    @property
    def domain(self) -> str:
        if self.gamma > 0:
            return "Frechet"
        if self.gamma < 0:
            return "Weibull"
        return "Gumbel"


@dataclass(frozen=True)
class FractionLevels:
    """Decreasing fractions 1 >= tau_1 > ... > tau_J > 0.

    ``r`` is set when the levels are geometric, tau_j = r^(j-1).
    """

    taus: tuple
    r: float | None = None

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        if len(taus) < 1:
            raise DomainError("at least one level is required")
        if not (0 < taus[-1] and taus[0] <= 1):
            raise DomainError("levels must lie in (0, 1]")
        if any(b >= a for a, b in zip(taus, taus[1:])):
            raise DomainError("levels must be strictly decreasing")
        object.__setattr__(self, "taus", taus)

    @classmethod
    def geometric(cls, r: float, J: int) -> "FractionLevels":
        if not 0 < r < 1:
            raise DomainError(f"ratio r must lie in (0, 1), got {r!r}")
        if J < 1:
            raise DomainError(f"J must be positive, got {J!r}")
        return cls(tuple(r ** j for j in range(J)), r=float(r))

    @property
    def J(self) -> int:
        return len(self.taus)

    @property
    def is_geometric(self) -> bool:
        if self.r is None:
            return False
        return all(math.isclose(t, self.r ** j, rel_tol=1e-12)
                   for j, t in enumerate(self.taus))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.taus)


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise DomainError("K_z is defined for u > 0 only")
    return u


def k_fn(z, u):
    """K_z(u), cancellation-safe near z = 0."""
    u = _check_u(u)
    z = np.asarray(z, dtype=float)
    L = np.log(u)
    w = z * L
    small = np.abs(w) < SERIES_SWITCH
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        closed = np.expm1(w) / z
    # log u * (1 + w/2 + w^2/6 + w^3/24)
    series = L * (1.0 + w * (1.0 / 2.0 + w * (1.0 / 6.0 + w / 24.0)))
    out = np.where(small, series, closed)
    return float(out) if out.ndim == 0 else out


def k_fn_prime(z, u):
    """K'_z(u) = dK_z(u)/dz, cancellation-safe near z = 0."""
    u = _check_u(u)
    z = np.asarray(z, dtype=float)
    L = np.log(u)
    w = z * L
    small = np.abs(w) < PRIME_SERIES_SWITCH
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        closed = (w * np.exp(w) - np.expm1(w)) / (z * z)
    # log^2 u * sum_m (m + 1) w^m / (m + 2)!
    poly = np.zeros_like(w)
    for c in reversed(_PRIME_COEFS):
        poly = poly * w + c
    series = L * L * poly
    out = np.where(small, series, closed)
    return float(out) if out.ndim == 0 else out


def k_fn_inverse(z, t):
    """Solve K_z(u) = t for u > 0, i.e. (1 + z t)^(1/z) or exp(t)."""
    z = np.asarray(z, dtype=float)
    t = np.asarray(t, dtype=float)
    zt = z * t
    if np.any(~(1.0 + zt > 0)):
        raise DomainError("K_z^{-1}(t) requires 1 + z t > 0")
    # both branches are evaluated everywhere; the unused one may overflow
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        closed = np.exp(np.log1p(zt) / z)
        # log1p(zt)/z = t (1 - zt/2 + (zt)^2/3 - (zt)^3/4)
        series = np.exp(t * (1.0 - zt * (0.5 - zt * (1.0 / 3.0 - zt / 4.0))))
    out = np.where(np.abs(zt) < SERIES_SWITCH, series, closed)
    return float(out) if out.ndim == 0 else out


def remainder_b(true_quantile: Callable[[float], float], aux_a: Callable[[float], float],
                gamma: float, t: float, alpha: float) -> float:
    """Second-order remainder (q(t a) - q(a)) / a(q(a)) - K_gamma(1/t)."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not t > 0 or not 0 < t * alpha < 1:
        raise DomainError(f"t * alpha must lie in (0, 1), got t={t!r}")
    qa = true_quantile(alpha)
    return (true_quantile(t * alpha) - qa) / aux_a(qa) - k_fn(gamma, 1.0 / t)


def v_matrix(levels: FractionLevels) -> np.ndarray:
    """V_{j,j'} = 1 / tau_{min(j, j')}, i.e. one over the larger fraction."""
    tau = levels.as_array()
    return 1.0 / np.maximum.outer(tau, tau)


def sigma_matrix(gamma: float, levels: FractionLevels) -> np.ndarray:
    """Sigma_{j,j'} = (tau_j tau_j')^(-gamma) / tau_{min(j, j')}."""
    tau = levels.as_array()
    return np.outer(tau ** -gamma, tau ** -gamma) * v_matrix(levels)


def sigma_tilde_matrix(gamma: float, levels: FractionLevels) -> np.ndarray:
    return sigma_matrix(min(gamma, 0.0), levels)


def _padded_weights(weights: Sequence[float], J: int) -> np.ndarray:
    pi = np.asarray(weights, dtype=float).reshape(-1)
    if pi.shape[0] != J - 2:
        raise InvalidWeightsError(f"expected {J - 2} weights for J={J}, got {pi.shape[0]}")
    if abs(math.fsum(pi) - 1.0) > 1e-12:
        raise InvalidWeightsError(f"weights sum to {math.fsum(pi)!r}, not 1")
    # index j in 1..J maps to position j + 1; pi_{-1} = pi_0 = pi_{J-1} = pi_J = 0
    padded = np.zeros(J + 2)
    padded[2:J] = pi
    return padded


def rp_design_matrix(gamma: float, r: float, J: int, weights: Sequence[float]) -> np.ndarray:
    """The 3 x J matrix A(x) mapping the quantile fluctuations xi_1..xi_J to
    the linearized errors of (gamma_hat, a_hat, q_hat(alpha))."""
    pi = _padded_weights(weights, J)
    log_r = math.log(r)
    kr = k_fn(gamma, r)
    kpr = k_fn_prime(gamma, r)
    rg = r ** -gamma
    e_pi = sum(j * pi[j + 1] for j in range(1, J + 1))
    c = e_pi - kpr / (log_r * kr)
    b_gamma = (1.0 / log_r, -(1.0 + rg) / log_r, rg / log_r)
    b_a = (1.0 + c, -rg - (rg + 1.0) * c, rg * c)
    A = np.zeros((3, J))
    for j in range(1, J + 1):
        lag = (pi[j + 1], pi[j], pi[j - 1])
        scale = r ** (gamma * j)
        A[0, j - 1] = scale * sum(b * p for b, p in zip(b_gamma, lag))
        A[1, j - 1] = scale * sum(b * p for b, p in zip(b_a, lag))
    A[2, 0] = kr
    return A


def rp_covariance(gamma: float, levels: FractionLevels, weights: Sequence[float],
                  kernel_l2: float, g_at_x: float) -> np.ndarray:
    """Asymptotic covariance S(x) of (gamma_hat, a_hat / a - 1, (q_hat - q) / a)
    scaled by sqrt(n h^p alpha_n)."""
    if not levels.is_geometric:
        raise DomainError("rp_covariance needs geometric levels tau_j = r^(j-1)")
    if not (kernel_l2 > 0 and g_at_x > 0):
        raise DomainError("kernel_l2 and g_at_x must be positive")
    A = rp_design_matrix(gamma, levels.r, levels.J, weights)
    kr = k_fn(gamma, levels.r)
    S = kernel_l2 / (g_at_x * kr * kr) * (A @ sigma_matrix(gamma, levels) @ A.T)
    return 0.5 * (S + S.T)


def extrapolation_variance_factor(gamma: float) -> np.ndarray:
    g = min(gamma, 0.0)
    return np.array([1.0, -g, g * g])


def extrapolation_variance(gamma: float, levels: FractionLevels, weights: Sequence[float],
                           kernel_l2: float, g_at_x: float) -> float:
    """c^t S c, the limiting variance of the extrapolated quantile error."""
    c = extrapolation_variance_factor(gamma)
    return float(c @ rp_covariance(gamma, levels, weights, kernel_l2, g_at_x) @ c)
