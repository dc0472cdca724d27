"""Kernel-smoothed extremal quantile regression.

Conditional survival and quantile estimation by kernel smoothing, refined
Pickands estimators of the conditional extreme-value index with
extrapolation to extreme quantile levels, a generalized Pareto benchmark,
data-driven parameter selection, and a Monte Carlo harness.
"""

__version__ = "0.1.0"

from .conditional import (LocalWindow, Sample, density_estimate, local_window,  # noqa: E402
                          quantile_estimate, quantile_grid, survival_estimate)
from .errors import (ConfigError, DataError, DegenerateSpacingError, DomainError,  # noqa: E402
                     EmptyWindowError, ExtremeQRError, InsufficientExceedancesError,
                     InvalidBandwidthError, InvalidWeightsError, SelectionError,
                     WindowTooSmallError)
from .evt_core import (FractionLevels, TailIndex, k_fn, k_fn_inverse, k_fn_prime,  # noqa: E402
                       rp_covariance, extrapolation_variance)
from .gp_benchmark import (ExceedanceSet, GPFit, build_exceedances, gp_fit,  # noqa: E402
                           gp_loglik, gp_quantile)
from .kernel import KernelSpec, make_kernel, triweight  # noqa: E402
from .pickands import (RPConfig, RPEstimate, extrapolate, rp_extreme_quantile,  # noqa: E402
                       rp_gamma, rp_scale)
from .selection import (SelectionGrid, SelectionResult, cv_bandwidth,  # noqa: E402
                        select_hk_simultaneous, select_k_separate, yu_jones_bandwidth)
from .simulation import (EstimatorSpec, MCConfig, MetricReport, Scenario, generate,  # noqa: E402
                         run_mc)
