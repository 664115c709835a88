"""Desk-scale experiments on the pinned benchmark chain."""
import time

import numpy as np

from .objective import JtaConfig
from .pipeline import benchmark_chain, quantize_chain, quantize_layer


def k_trend(Ks=(1, 5, 25, 50), seed=7, wbit=3, **cfg_kw):
    """Mean per-layer K-best residual of the full chain for each K."""
    layers, X0 = benchmark_chain(seed)
    out = {}
    for K in Ks:
        cfg = JtaConfig.for_wbit(wbit, K=K, seed=seed, **cfg_kw)
        res = quantize_chain(layers, X0, cfg)
        out[K] = {
            "mean_kbest_residual": float(np.mean([r.kbest_residual_sum for r in res.reports])),
            "kbest_residual_sums": [r.kbest_residual_sum for r in res.reports],
            "babai_residual_sums": [r.babai_residual_sum for r in res.reports],
            "end_to_end_error": res.end_to_end_error,
        }
    return out


def mu_sweep(mus=(0.0, 0.6, 1.0), lam=0.2, K=5, seed=7, wbit=3):
    layers, X0 = benchmark_chain(seed)
    out = []
    for mu in mus:
        cfg = JtaConfig(mu=mu, lam=lam, K=K, wbit=wbit, seed=seed)
        res = quantize_chain(layers, X0, cfg)
        out.append({
            "mu": mu,
            "end_to_end_error": res.end_to_end_error,
            "jta_scores": [r.jta_score_value for r in res.reports],
            "kbest_residual_sums": [r.kbest_residual_sum for r in res.reports],
        })
    return out


def layer_runtime(K, seed=7, wbit=3, repeats=5, threads=None):
    """Median per-layer wall time over the benchmark chain's layers at fixed inputs."""
    layers, X0 = benchmark_chain(seed)
    cfg = JtaConfig.for_wbit(wbit, K=K, seed=seed)
    times = []
    for _ in range(repeats):
        X = X0
        for i, layer in enumerate(layers):
            t0 = time.perf_counter()
            quantize_layer(layer, X, X, cfg, i, threads)
            times.append(time.perf_counter() - t0)
            X = layer.apply(X)
    return float(np.median(times))
