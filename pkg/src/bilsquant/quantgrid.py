"""Integer grids: min-max calibration, rounding, and dequantization."""
from dataclasses import dataclass

import numpy as np

SCALE_FLOOR = 1e-12


def round_half_away(x):
    """Round to nearest integer, ties away from zero (works on scalars and arrays)."""
    x = np.asarray(x, dtype=np.float64)
    a = np.abs(x)
    f = np.floor(a)
    r = f + (a - f >= 0.5)
    return np.copysign(r, x)


def box_hi(wbit):
    return (1 << int(wbit)) - 1


def clamp_round(x, hi):
    """``clamp(round(x), {0..hi})`` as int64."""
    return np.clip(round_half_away(x), 0, hi).astype(np.int64)


@dataclass(frozen=True)
class QuantGrid:
    wbit: int
    group_size: int
    S: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        if not 2 <= self.wbit <= 8:
            raise ValueError(f"wbit must be in [2, 8], got {self.wbit}")
        if self.S.shape != self.Z.shape:
            raise ValueError("S and Z shapes differ")
        if not np.all(self.S > 0):
            raise ValueError("scales must be positive")

    @property
    def box_hi(self):
        return box_hi(self.wbit)

    @property
    def shape(self):
        return self.S.shape


def _groups(m, group_size):
    if group_size == 0:
        return [(0, m)]
    if group_size < 1 or group_size > m or m % group_size:
        raise ValueError(f"group_size {group_size} must divide the row count {m}")
    return [(i, i + group_size) for i in range(0, m, group_size)]


def calibrate_minmax(W, wbit, group_size=0):
    """Asymmetric min-max grid per (row group, column).

    A constant group gets the floor scale ``max(|w|, 1) * 1e-12`` and a real
    zero-point that puts ``w`` on the box midpoint.
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise ValueError("W must be 2-D")
    hi = box_hi(wbit)
    m, n = W.shape
    S = np.empty_like(W)
    Z = np.empty_like(W)
    for lo, up in _groups(m, group_size):
        block = W[lo:up]
        wmin = block.min(axis=0)
        wmax = block.max(axis=0)
        s = (wmax - wmin) / hi
        flat = s <= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.clip(round_half_away(-wmin / s), 0, hi)
        if np.any(flat):
            w0 = wmax[flat]
            s_floor = np.maximum(np.abs(w0), 1.0) * SCALE_FLOOR
            s[flat] = s_floor
            z[flat] = (hi + 1) // 2 - w0 / s_floor
        S[lo:up] = s
        Z[lo:up] = z
    return QuantGrid(int(wbit), int(group_size), S, Z)


def nearest_grid_point(w, s, z, wbit):
    """Round-to-nearest grid index ``clamp(round(w/s + z))``."""
    return clamp_round(np.asarray(w) / s + z, box_hi(wbit))


def quantize_rtn(W, grid):
    return nearest_grid_point(W, grid.S, grid.Z, grid.wbit)


def dequantize(Q, grid):
    """``S * (Q - Z)``; rejects entries outside the box."""
    Q = np.asarray(Q)
    if Q.shape != grid.shape:
        raise ValueError(f"Q shape {Q.shape} does not match grid {grid.shape}")
    if Q.size and (Q.min() < 0 or Q.max() > grid.box_hi):
        raise ValueError(f"Q has entries outside [0, {grid.box_hi}]")
    return grid.S * (Q - grid.Z)
