import numpy as np
import pytest
from hypothesis import given, strategies as st

from bilsquant.quantgrid import (SCALE_FLOOR, QuantGrid, calibrate_minmax, dequantize,
                                 nearest_grid_point, quantize_rtn, round_half_away)


def test_round_half_away():
    x = np.array([2.5, -2.5, 0.5, -0.5, 1.49999, 0.49999999999999994, 3.0, -0.0])
    np.testing.assert_array_equal(round_half_away(x), [3, -3, 1, -1, 1, 0, 3, 0])


def test_grid_aligned_column():
    g = calibrate_minmax(np.arange(16.0)[:, None], 4, 0)
    np.testing.assert_array_equal(g.S, 1.0)
    np.testing.assert_array_equal(g.Z, 0.0)


def test_two_point_column():
    g = calibrate_minmax(np.array([[-1.0], [1.0]]), 2, 0)
    s, z = g.S[0, 0], g.Z[0, 0]
    assert s == pytest.approx(2 / 3)
    assert z == 2  # round(1.5) away from zero
    # endpoints land on the box ends under clamp(round(w/s) + z)
    ends = np.clip(round_half_away(np.array([-1.0, 1.0]) / s) + z, 0, 3)
    np.testing.assert_array_equal(ends, [0, 3])


def test_constant_group():
    g = calibrate_minmax(np.full((3, 1), 5.0), 3, 0)
    s = g.S[0, 0]
    assert s == 5.0 * SCALE_FLOOR
    q = quantize_rtn(np.full((3, 1), 5.0), g)
    assert np.all(q == 4)
    w_hat = dequantize(q, g)
    assert np.all(np.abs(w_hat - 5.0) <= s * 4)


def test_nearest_grid_point_examples():
    assert nearest_grid_point(0.0, 1.0, 0.0, 3) == 0
    assert nearest_grid_point(2.5, 1.0, 0.0, 3) == 3
    assert nearest_grid_point(1.0, 1.0, 1.5, 3) == 3
    assert nearest_grid_point(-1.0, 1.0, 0.0, 3) == 0
    assert nearest_grid_point(100.0, 1.0, 0.0, 3) == 7


def test_dequantize_examples(rng):
    S = rng.uniform(0.1, 1, (4, 3))
    Z = rng.integers(0, 8, (4, 3)).astype(float)
    g = QuantGrid(3, 0, S, Z)
    np.testing.assert_array_equal(dequantize(Z.astype(int), g), 0.0)
    Q = rng.integers(0, 8, (4, 3))
    np.testing.assert_array_equal(dequantize(Q, QuantGrid(3, 0, np.ones((4, 3)), np.zeros((4, 3)))), Q)
    with pytest.raises(ValueError):
        dequantize(Q + 8, g)


def test_grid_validation():
    with pytest.raises(ValueError):
        calibrate_minmax(np.ones((6, 2)), 3, 4)
    with pytest.raises(ValueError):
        calibrate_minmax(np.ones((6, 2)), 9, 0)
    with pytest.raises(ValueError):
        QuantGrid(3, 0, np.zeros((2, 2)), np.zeros((2, 2)))


@given(st.integers(2, 8), st.sampled_from([0, 2, 4]), st.integers(0, 2**32 - 1))
def test_round_trip_on_grid_points(wbit, group_size, seed):
    rng = np.random.default_rng(seed)
    hi = 2**wbit - 1
    m, n = 8, 3
    Q = rng.integers(0, hi + 1, (m, n))
    glen = m if group_size == 0 else group_size
    Q[::glen] = 0
    Q[1::glen] = hi
    s = np.repeat(rng.choice([0.25, 0.5, 1.0, 2.0], (m // glen, n)), glen, axis=0)
    z = np.repeat(rng.integers(0, hi + 1, (m // glen, n)), glen, axis=0)
    W = s * (Q - z)
    g = calibrate_minmax(W, wbit, group_size)
    np.testing.assert_array_equal(dequantize(quantize_rtn(W, g), g), W)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_rtn_error_bound_and_group_constancy(wbit, seed):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((8, 4))
    g = calibrate_minmax(W, wbit, 4)
    for lo in (0, 4):
        assert np.all(g.S[lo:lo + 4] == g.S[lo]) and np.all(g.Z[lo:lo + 4] == g.Z[lo])
    x = W / g.S + g.Z
    inside = (x >= 0) & (x <= g.box_hi)
    err = np.abs(dequantize(quantize_rtn(W, g), g) - W)
    assert np.all(err[inside] <= g.S[inside] / 2 * (1 + 1e-12))
    edge = np.minimum(np.abs(x), np.abs(x - g.box_hi))
    assert np.all(err[~inside] <= edge[~inside] * g.S[~inside] * (1 + 1e-9) + 1e-15)
