import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from extremeqr.conditional import (Sample, density_estimate, kernel_weights, local_window,
                                   quantile_estimate, quantile_grid, survival_estimate)
from extremeqr.errors import DataError, DomainError, EmptyWindowError
from extremeqr.kernel import triweight

K = triweight()


def test_density_examples():
    assert density_estimate(Sample([0.0], [1.0]), K, 1.0, 0.0) == 1.09375
    assert density_estimate(Sample([5.0, 6.0], [1.0, 2.0]), K, 1.0, 0.0) == 0.0
    s = Sample([0.0, 0.5], [1.0, 2.0])
    assert density_estimate(s, K, 1.0, 0.0) == pytest.approx((1.09375 + 35 / 32 * 0.75 ** 3) / 2)


def test_survival_examples():
    s = Sample([0.0], [5.0])
    assert survival_estimate(s, K, 1.0, 0.0, 4.0) == 1.0
    assert survival_estimate(s, K, 1.0, 0.0, 5.0) == 0.0
    s2 = Sample([-0.3, 0.3], [1.0, 3.0])
    assert survival_estimate(s2, K, 1.0, 0.0, 2.0) == 0.5
    with pytest.raises(EmptyWindowError):
        survival_estimate(s, K, 1.0, 3.0, 1.0)


def test_quantile_examples():
    s = Sample([-0.3, 0.3], [1.0, 3.0])
    assert quantile_estimate(s, K, 1.0, 0.0, 0.5) == 1.0
    assert quantile_estimate(s, K, 1.0, 0.0, 0.4) == 3.0
    assert quantile_estimate(s, K, 1.0, 0.0, 0.999) == 1.0
    with pytest.raises(EmptyWindowError):
        quantile_estimate(s, K, 0.1, 0.0, 0.5)
    with pytest.raises(DomainError):
        quantile_estimate(s, K, 1.0, 0.0, 1.0)


def test_ties_merge_onto_one_jump():
    s = Sample([0.0, 0.1, -0.1, 0.2], [2.0, 2.0, 1.0, 4.0])
    win = local_window(s, K, 1.0, 0.0)
    w = kernel_weights(s, K, 1.0, 0.0)
    above_two = w[3] / w.sum()
    assert win.survival(2.0) == pytest.approx(above_two)
    assert win.survival(1.999) == pytest.approx((w[0] + w[1] + w[3]) / w.sum())
    assert win.quantile(above_two) == 2.0


def test_sample_validation():
    with pytest.raises(DataError):
        Sample([0.0, 1.0], [1.0])
    with pytest.raises(DataError):
        Sample([0.0], [float("nan")])


def test_multivariate_window():
    xs = np.array([[0.0, 0.0], [0.5, 0.5], [2.0, 2.0]])
    s = Sample(xs, [1.0, 2.0, 3.0])
    win = local_window(s, K, 1.0, [0.0, 0.0])
    assert win.n_star == 2


def _samples():
    n = st.integers(1, 30)
    return n.flatmap(lambda m: st.tuples(
        st.lists(st.floats(0, 1, allow_nan=False), min_size=m, max_size=m),
        # responses on a 1/64 lattice: exact ties and well separated jumps
        st.lists(st.integers(-320, 320).map(lambda i: i / 64), min_size=m, max_size=m)))


@settings(max_examples=200, deadline=None)
@given(_samples(), st.floats(0.05, 1.0), st.floats(0, 1))
def test_survival_step_function_properties(data, h, x):
    s = Sample(*data)
    win = local_window(s, K, h, x)
    if win.is_empty:
        return
    ys = np.unique(win.sorted_y)
    grid = np.sort(np.concatenate([ys, ys - 1e-9, ys + 1e-9, [ys[0] - 1, ys[-1] + 1]]))
    surv = win.survival(grid)
    assert np.all(np.diff(surv) <= 1e-15)
    assert surv[0] == 1.0 and surv[-1] == 0.0
    # right continuity: jumps only at in-window responses
    assert np.allclose(win.survival(ys), win.survival(ys + 1e-12))


@settings(max_examples=200, deadline=None)
@given(_samples(), st.floats(0.05, 1.0), st.floats(0, 1))
def test_density_times_n_is_total_weight(data, h, x):
    s = Sample(*data)
    total = float(np.sum(kernel_weights(s, K, h, x)))
    assert density_estimate(s, K, h, x) * s.n == pytest.approx(total, rel=1e-12, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(_samples(), st.floats(0.05, 1.0))
def test_quantile_grid_matches_window_path(data, h):
    s = Sample(*data)
    xs = np.linspace(0, 1, 7)
    alphas = np.array([0.01, 0.1, 0.33, 0.5, 0.9])
    q, n_star = quantile_grid(s, K, h, xs, alphas)
    for i, x in enumerate(xs):
        win = local_window(s, K, h, x)
        assert n_star[i] == win.n_star
        if win.is_empty:
            assert np.all(np.isnan(q[i]))
        else:
            assert np.array_equal(q[i], win.quantile(alphas))
