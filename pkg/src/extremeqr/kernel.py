"""Compactly supported smoothing kernels and the scaled form K_h(u) = K(u/h)/h^p."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import InvalidBandwidthError

__all__ = [
    "KernelSpec",
    "make_kernel",
    "triweight",
    "biweight",
    "epanechnikov",
    "scaled_eval",
]


@dataclass(frozen=True)
class KernelSpec:
    """A bounded density supported in the closed unit ball.

    For ``dim == 1`` ``evaluate`` receives an array of scalar arguments; for
    ``dim > 1`` it receives an array of shape ``(..., dim)`` and must reduce
    the last axis itself (product or radial construction is up to the caller).
    """

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    l2_norm_sq: float
    sup_norm: float
    dim: int = 1
    support_radius: float = 1.0

    def __call__(self, u):
        return self.evaluate(np.asarray(u, dtype=float))


def make_kernel(name, fn, dim=1, l2_norm_sq=None, sup_norm=None, check=True):
    """Build a :class:`KernelSpec`, computing missing constants by quadrature.

    For univariate kernels the unit mass and the support condition are
    checked with adaptive quadrature on [-1, 1].
    """
    if dim == 1 and check:
        mass, _ = integrate.quad(lambda t: float(fn(np.asarray(t))), -1.0, 1.0,
                                 epsabs=1e-13, epsrel=1e-13)
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"kernel {name!r} integrates to {mass}, not 1")
        outside = fn(np.array([-1.5, -1.0 - 1e-9, 1.0 + 1e-9, 2.0]))
        if np.any(outside != 0):
            raise ValueError(f"kernel {name!r} is not supported in [-1, 1]")
        if l2_norm_sq is None:
            l2_norm_sq, _ = integrate.quad(lambda t: float(fn(np.asarray(t))) ** 2,
                                           -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
        if sup_norm is None:
            grid = np.linspace(-1.0, 1.0, 20001)
            sup_norm = float(np.max(fn(grid)))
    if l2_norm_sq is None or sup_norm is None:
        raise ValueError("multivariate kernels need explicit l2_norm_sq and sup_norm")
    return KernelSpec(name=name, evaluate=fn, l2_norm_sq=float(l2_norm_sq),
                      sup_norm=float(sup_norm), dim=dim)


# Polynomial powers are written as products so every platform rounds the same way.
def _triweight(u):
    u = np.asarray(u, dtype=float)
    s = 1.0 - u * u
    return np.where(np.abs(u) <= 1.0, (35.0 / 32.0) * (s * s * s), 0.0)


def _biweight(u):
    u = np.asarray(u, dtype=float)
    s = 1.0 - u * u
    return np.where(np.abs(u) <= 1.0, (15.0 / 16.0) * (s * s), 0.0)


def _epanechnikov(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def triweight() -> KernelSpec:
    """K(t) = 35/32 (1 - t^2)^3 on [-1, 1]; ||K||_2^2 = 350/429 exactly."""
    return make_kernel("triweight", _triweight, l2_norm_sq=350.0 / 429.0,
                       sup_norm=35.0 / 32.0)


def biweight() -> KernelSpec:
    return make_kernel("biweight", _biweight, l2_norm_sq=5.0 / 7.0, sup_norm=15.0 / 16.0)


def epanechnikov() -> KernelSpec:
    return make_kernel("epanechnikov", _epanechnikov, l2_norm_sq=0.6, sup_norm=0.75)


KERNELS = {
    "triweight": triweight,
    "biweight": biweight,
    "epanechnikov": epanechnikov,
}


def scaled_eval(k: KernelSpec, h: float, u) -> np.ndarray | float:
    """K_h(u) = K(u/h) / h^p.

    ``u`` is a scalar or array for univariate kernels, or an array whose last
    axis has length ``k.dim`` otherwise.
    """
    if not h > 0:
        raise InvalidBandwidthError(f"bandwidth must be positive, got {h!r}")
    u = np.asarray(u, dtype=float)
    out = k.evaluate(u / h) / h ** k.dim
    return float(out) if out.ndim == 0 else out
