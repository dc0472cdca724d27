"""Optional figure rendering for CLI reports (requires matplotlib).

Only the CLI calls into this module, and only when ``--plot`` is given, so
the library itself has no plotting dependency.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError

__all__ = ["plot_curves", "plot_errors"]


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise ConfigError("plot", "rendering figures needs matplotlib "
                                  "(pip install matplotlib)") from None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _finite(v):
    return np.array([math.nan if x is None else float(x) for x in v])


def plot_curves(path: str, x, curves: dict, points=None, title: str = "", ylabel: str = ""):
    """Line plot of named curves over ``x`` (None/NaN gaps left blank), with
    optional scatter ``points = (xs, ys)`` underneath."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if points is not None:
        ax.scatter(points[0], points[1], s=6, color="tab:blue", alpha=0.4, label="data")
    for name, ys in curves.items():
        ax.plot(x, _finite(ys), lw=1.4, label=name)
    ax.set_xlabel("x")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_errors(path: str, grid, per_point: dict, title: str = ""):
    """Mean error (bias curve) per x for each report, with +-2 standard errors."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, errors in per_point.items():
        e = np.asarray(errors, dtype=float)
        if e.shape[0] == 0:
            continue
        mean = e.mean(axis=0)
        ax.plot(grid, mean, lw=1.4, label=name)
        if e.shape[0] > 1:
            se = e.std(axis=0, ddof=1) / math.sqrt(e.shape[0])
            ax.fill_between(grid, mean - 2 * se, mean + 2 * se, alpha=0.2)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel("x")
    ax.set_ylabel("mean error")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
