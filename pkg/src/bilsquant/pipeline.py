"""Layer-wise quantization of a chain of linear layers with runtime activations."""
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .decoder import DegenerateTemperature
from .matlin import NotPositiveDefinite, as_matrix
from .objective import assemble_columns, build_target, jta_score, residuals
from .parallel import ppi_decode
from .quantgrid import calibrate_minmax, dequantize, quantize_rtn

ACTIVATIONS = ("none", "relu")


@dataclass
class LayerSpec:
    W: np.ndarray
    activation: str = "none"

    def __post_init__(self):
        self.W = as_matrix(self.W, "W")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    def apply(self, X, W=None):
        Y = X @ (self.W if W is None else W)
        return np.maximum(Y, 0.0) if self.activation == "relu" else Y


@dataclass
class LayerReport:
    layer_index: int
    output_norm: float
    babai_residual_sum: float
    kbest_residual_sum: float
    jta_score_value: float
    improvement_fraction: float
    wall_time: float
    rtn_fallback_columns: int = 0
    input_drift: float = 0.0

    def as_dict(self):
        return asdict(self)


@dataclass
class QuantizedLayer:
    Q: np.ndarray
    grid: object
    activation: str


@dataclass
class ChainResult:
    layers: List[QuantizedLayer]
    reports: List[LayerReport]
    end_to_end_error: float
    total_wall_time: float = 0.0
    drift: List[float] = field(default_factory=list)


class LayerError(RuntimeError):
    """A solver failure, tagged with the layer it happened in."""

    def __init__(self, layer_index, cause):
        self.layer_index = layer_index
        self.cause = cause
        hint = "; try a larger --lambda" if isinstance(cause, NotPositiveDefinite) else ""
        super().__init__(f"layer {layer_index}: {type(cause).__name__}: {cause}{hint}")


def quantize_layer(layer, X, Xt, cfg, layer_index=0, threads=None):
    """Quantize one layer; returns ``(Q, grid, LayerReport)``."""
    t0 = time.perf_counter()
    W = layer.W
    grid = calibrate_minmax(W, cfg.wbit, cfg.group_size)
    probs = assemble_columns(Xt, X, W, grid, cfg)
    pairs = ppi_decode(probs, cfg, threads)
    Q = np.stack([best.q for _, best in pairs], axis=1)
    best_res = np.array([best.residual for _, best in pairs])
    greedy_res = np.array([g.residual for g, _ in pairs])
    improved = best_res < greedy_res

    fallback = 0
    if cfg.rtn_guard:
        Q_rtn = quantize_rtn(W, grid)
        for j, p in enumerate(probs):
            r = residuals(p.rbar, p.qbar, Q_rtn[:, j][None])[0]
            if r < best_res[j]:
                Q[:, j] = Q_rtn[:, j]
                best_res[j] = r
                fallback += 1

    What = dequantize(Q, grid)
    Ystar = build_target(X, Xt, W, cfg.mu)
    report = LayerReport(
        layer_index=layer_index,
        output_norm=float(np.linalg.norm(Xt @ W)),
        babai_residual_sum=float(greedy_res.sum()),
        kbest_residual_sum=float(best_res.sum()),
        jta_score_value=jta_score(What, Xt, Ystar, W, cfg.lam),
        improvement_fraction=float(improved.mean()),
        wall_time=time.perf_counter() - t0,
        rtn_fallback_columns=fallback,
        input_drift=float(np.linalg.norm(Xt - X)),
    )
    return Q, grid, report


def quantize_chain(layers, X0, cfg, threads=None):
    """Quantize ``layers`` in order, feeding each the partially quantized prefix output."""
    t0 = time.perf_counter()
    X_fp = as_matrix(X0, "X0")
    X_rt = X_fp
    out_layers, reports, drift = [], [], []
    for i, layer in enumerate(layers):
        if X_fp.shape[1] != layer.W.shape[0]:
            raise ValueError(
                f"layer {i} expects {layer.W.shape[0]} inputs, got {X_fp.shape[1]}"
            )
        drift.append(float(np.linalg.norm(X_rt - X_fp)))
        try:
            Q, grid, report = quantize_layer(layer, X_fp, X_rt, cfg, i, threads)
        except (NotPositiveDefinite, DegenerateTemperature) as exc:
            raise LayerError(i, exc) from exc
        out_layers.append(QuantizedLayer(Q, grid, layer.activation))
        reports.append(report)
        X_fp = layer.apply(X_fp)
        X_rt = layer.apply(X_rt, dequantize(Q, grid))
    ref = np.linalg.norm(X_fp)
    err = float(np.linalg.norm(X_fp - X_rt) / ref) if ref > 0 else float(np.linalg.norm(X_rt))
    return ChainResult(out_layers, reports, err, time.perf_counter() - t0, drift)


def synthetic_calibration(p, m, seed):
    """Standard-normal calibration rows."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), 0xCA11B])).standard_normal((p, m))


def random_chain(widths, seed, activation="relu", last_activation="none"):
    """He-scaled random layers ``widths[0] -> widths[1] -> ...``."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x1A7E5]))
    layers = []
    for i, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
        act = last_activation if i == len(widths) - 2 else activation
        layers.append(LayerSpec(rng.standard_normal((a, b)) * np.sqrt(2.0 / a), act))
    return layers


BENCHMARK_WIDTHS = (16, 16, 16, 8)


def benchmark_chain(seed=7, p=64):
    """The pinned 3-layer ReLU benchmark: ``(layers, X0)``."""
    return random_chain(BENCHMARK_WIDTHS, seed), synthetic_calibration(p, BENCHMARK_WIDTHS[0], seed)
