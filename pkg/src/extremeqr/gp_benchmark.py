"""Local-constant generalized Pareto fit to kernel-weighted exceedances and the
resulting extreme conditional quantile estimator (the benchmark method).

The log-likelihood is

    L(sigma, gamma) = (1/N_x) sum_i w_i log g(z_i; sigma, gamma)

with g the GP density, w_i = K_h(X_i - x) and N_x the number of exceedances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .conditional import Sample, kernel_weights, local_window
from .errors import DomainError, InsufficientExceedancesError, WindowTooSmallError
from .evt_core import k_fn
from .kernel import KernelSpec

__all__ = [
    "ExceedanceSet",
    "GPFit",
    "build_exceedances",
    "threshold_exceedances",
    "gp_loglik",
    "gp_fit",
    "gp_quantile",
]

GAMMA_FLOOR = -1.0 + 1e-6
SEED_GAMMAS = np.round(np.arange(-0.9, 1.5 + 1e-9, 0.1), 10)
SEED_SIGMA_POINTS = 15
SEED_SIGMA_SPAN = 10.0
MAX_ITER = 500
REL_TOL = 1e-8


@dataclass(frozen=True)
class ExceedanceSet:
    """Exceedances z = Y - u_x > 0 with their kernel weights.

    ``k_x`` counts the positively weighted exceedances; ``n_star`` is the
    number of observations in the closed window around ``x``.
    """

    z: np.ndarray
    w: np.ndarray
    u_x: float
    n_star: int
    k_x: int

    @property
    def N(self) -> int:
        return int(self.z.shape[0])

    @property
    def degenerate(self) -> bool:
        return self.k_x == 0


@dataclass(frozen=True)
class GPFit:
    sigma_hat: float
    gamma_hat: float
    loglik: float
    converged: bool
    iterations: int


def _make_set(z, w, u, n_star) -> ExceedanceSet:
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    return ExceedanceSet(z=z, w=w, u_x=float(u), n_star=int(n_star), k_x=int(np.sum(w > 0)))


def build_exceedances(s: Sample, k: KernelSpec, h: float, x, k_exceed: int) -> ExceedanceSet:
    """Threshold at the (n* - k)-th ascending in-window order statistic and
    collect the in-window responses strictly above it."""
    win = local_window(s, k, h, x)
    n_star = win.n_star
    if not 1 <= k_exceed < n_star:
        raise WindowTooSmallError(
            f"need 1 <= k < n_star, got k={k_exceed} with n_star={n_star}")
    u = win.sorted_y[n_star - k_exceed - 1]
    above = win.sorted_y > u
    return _make_set(win.sorted_y[above] - u, win.sorted_w[above], u, n_star)


def threshold_exceedances(s: Sample, k: KernelSpec, h: float, x, u: float) -> ExceedanceSet:
    """Exceedances over a fixed threshold ``u`` taken over the whole sample;
    observations outside the window enter with zero weight."""
    w_all = kernel_weights(s, k, h, x)
    above = s.ys > u
    n_star = local_window(s, k, h, x).n_star
    return _make_set(s.ys[above] - u, w_all[above], u, n_star)


def _loglik_terms(z, sigma, gamma):
    """Per-exceedance log density; -inf outside the support."""
    t = gamma * z / sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        if gamma == 0.0:
            out = -math.log(sigma) - z / sigma
        else:
            out = -math.log(sigma) - (1.0 / gamma + 1.0) * np.log1p(t)
    return np.where(1.0 + t > 0, out, -np.inf)


def gp_loglik(e: ExceedanceSet, sigma: float, gamma: float) -> float:
    """(1/N_x) sum_i w_i log g(z_i; sigma, gamma); -inf on support violation."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if e.N == 0:
        raise InsufficientExceedancesError("no exceedances")
    pos = e.w > 0
    terms = _loglik_terms(e.z[pos], float(sigma), float(gamma))
    if np.any(~np.isfinite(terms)):
        return -math.inf
    return float(np.sum(e.w[pos] * terms) / e.N)


def _seed_grid(e: ExceedanceSet, fix_gamma):
    """Best (loglik, sigma, gamma) over the seed grid, scanning gamma-major
    so ties resolve to the first grid point."""
    pos = e.w > 0
    z, w = e.z[pos], e.w[pos]
    zbar = float(np.mean(z))
    sigmas = zbar * np.geomspace(1.0 / SEED_SIGMA_SPAN, SEED_SIGMA_SPAN, SEED_SIGMA_POINTS)
    gammas = SEED_GAMMAS if fix_gamma is None else np.array([float(fix_gamma)])
    G = gammas[:, None, None]
    S = sigmas[None, :, None]
    t = G * z[None, None, :] / S
    with np.errstate(divide="ignore", invalid="ignore"):
        safe_g = np.where(G == 0.0, 1.0, G)
        terms = np.where(G == 0.0, -np.log(S) - z / S,
                         -np.log(S) - (1.0 / safe_g + 1.0) * np.log1p(t))
    terms = np.where(1.0 + t > 0, terms, -np.inf)
    ll = np.sum(w * terms, axis=-1) / e.N
    ll = np.where(np.all(1.0 + t > 0, axis=-1), ll, -np.inf)
    i = int(np.argmax(ll))
    ig, isg = np.unravel_index(i, ll.shape)
    return float(ll[ig, isg]), float(sigmas[isg]), float(gammas[ig])


def gp_fit(e: ExceedanceSet, fix_gamma: float | None = None) -> GPFit:
    """Maximize the weighted GP log-likelihood over sigma > 0, gamma > -1.

    A coarse seed grid picks the start; Nelder-Mead on (log sigma, gamma)
    refines it. ``converged`` is false when the simplex hit the iteration cap
    or ran onto the gamma floor (no interior maximum). ``fix_gamma``
    restricts the search to sigma alone.
    """
    if e.k_x < 2:
        raise InsufficientExceedancesError(
            f"GP fit needs at least 2 positively weighted exceedances, got {e.k_x}")
    seed_ll, seed_sigma, seed_gamma = _seed_grid(e, fix_gamma)
    if fix_gamma is None:
        def objective(p):
            if p[1] < GAMMA_FLOOR:
                return math.inf
            ll = gp_loglik(e, math.exp(p[0]), p[1])
            return -ll if math.isfinite(ll) else math.inf
        x0 = np.array([math.log(seed_sigma), seed_gamma])
        steps = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.05]])
    else:
        def objective(p):
            ll = gp_loglik(e, math.exp(p[0]), fix_gamma)
            return -ll if math.isfinite(ll) else math.inf
        x0 = np.array([math.log(seed_sigma)])
        steps = np.array([[0.0], [0.1]])
    simplex = x0[None, :] + steps
    res = optimize.minimize(
        objective, x0, method="Nelder-Mead",
        options=dict(initial_simplex=simplex, xatol=REL_TOL, fatol=REL_TOL * max(1.0, abs(seed_ll)),
                     maxiter=MAX_ITER, maxfev=4 * MAX_ITER))
    p = res.x
    ll = -float(res.fun)
    if not ll >= seed_ll:
        # never hand back anything worse than the seed
        p = x0
        ll = seed_ll
    sigma = math.exp(p[0])
    gamma = float(p[1]) if fix_gamma is None else float(fix_gamma)
    at_floor = fix_gamma is None and gamma < GAMMA_FLOOR + 1e-4
    return GPFit(sigma_hat=sigma, gamma_hat=gamma, loglik=ll,
                 converged=bool(res.success) and not at_floor, iterations=int(res.nit))


def gp_quantile(fit: GPFit, e: ExceedanceSet, beta: float) -> float:
    """u_x + sigma_hat K_{gamma_hat}(k_x / (n* beta))."""
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    if e.k_x <= 0 or e.n_star <= 0:
        raise DomainError("gp_quantile needs k_x > 0 and a nonempty window")
    return e.u_x + fit.sigma_hat * k_fn(fit.gamma_hat, e.k_x / (e.n_star * beta))
