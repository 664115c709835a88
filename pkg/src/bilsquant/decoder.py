"""Box-constrained Babai, Klein randomized rounding and K-best selection."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .objective import column_residual, residuals
from .quantgrid import clamp_round

_SEED_MASK = (1 << 64) - 1


class DegenerateTemperature(ValueError):
    """K is too large for the list-size rule to have a root rho > 1."""


@dataclass(frozen=True)
class Candidate:
    q: np.ndarray
    residual: float
    path: int = 0


@dataclass(frozen=True)
class KleinParams:
    alpha: float
    rho: float


def path_rng(seed, column, path):
    """Independent generator for one (column, path) pair, order-free."""
    ss = np.random.SeedSequence([int(seed) & _SEED_MASK, int(column), int(path)])
    return np.random.default_rng(ss)


def compute_alpha(K, m, min_rbar_diag):
    """Sharpness ``alpha = ln(rho) / min_diag**2`` with ``K = (e rho)^(2m/rho)``.

    ``K == 1`` gives ``alpha = inf`` (greedy). The log of the right-hand side,
    ``(2m/rho)(1 + ln rho)``, falls monotonically from ``2m`` at ``rho = 1``,
    so there is exactly one root on ``(1, inf)`` when ``1 < K < e^(2m)``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if min_rbar_diag <= 0:
        raise ValueError("min_rbar_diag must be positive")
    if K == 1:
        return KleinParams(math.inf, math.inf)
    lnK = math.log(K)
    if lnK >= 2 * m:
        raise DegenerateTemperature(
            f"K={K} >= e^(2m) for m={m}: no temperature root with rho > 1"
        )

    def g(rho):
        return (2 * m / rho) * (1 + math.log(rho)) - lnK

    lo, hi = 1.0 + 1e-9, 2.0
    while g(hi) > 0:
        lo, hi = hi, 2 * hi
    rho = brentq(g, lo, hi, xtol=1e-300, rtol=1e-14, maxiter=500)
    return KleinParams(math.log(rho) / min_rbar_diag ** 2, rho)


def exponent_weight(rbar_diag, rule):
    rbar_diag = np.asarray(rbar_diag, dtype=np.float64)
    return rbar_diag * rbar_diag if rule == "squared" else rbar_diag


def klein_pick(c, weight, alpha, hi, u, support=None):
    """Inverse-CDF draw from ``Pr(v) ~ exp(-alpha * weight * (c - v)^2)`` over ``{0..hi}``.

    ``c``, ``weight``, ``alpha`` and ``u`` broadcast against each other; the
    box axis is appended last. ``alpha = inf`` falls back to clamped rounding.
    ``support`` keeps only that many integers nearest ``c``.
    """
    c = np.asarray(c, dtype=np.float64)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=np.float64), c.shape)
    greedy = np.isinf(alpha)
    a = np.where(greedy, 0.0, alpha)
    v = np.arange(hi + 1, dtype=np.float64)
    d = c[..., None] - v
    logits = -(a * np.asarray(weight, dtype=np.float64))[..., None] * (d * d)
    if support is not None and support < hi + 1:
        rank = np.argsort(np.argsort(np.abs(d), axis=-1, kind="stable"), axis=-1)
        logits = np.where(rank < support, logits, -np.inf)
    logits = logits - logits.max(axis=-1, keepdims=True)
    cdf = np.cumsum(np.exp(logits), axis=-1)
    target = np.asarray(u, dtype=np.float64)[..., None] * cdf[..., -1:]
    idx = np.minimum(np.sum(cdf <= target, axis=-1), hi)
    return np.where(greedy, clamp_round(c, hi), idx).astype(np.int64)


def klein_probabilities(c, rbar_ii, alpha, box_hi, rule="squared"):
    """Exact sampling distribution of :func:`klein_sample_component`."""
    v = np.arange(box_hi + 1)
    logits = -alpha * float(exponent_weight(rbar_ii, rule)) * (c - v) ** 2
    p = np.exp(logits - logits.max())
    return p / p.sum()


def klein_sample_component(c, rbar_ii, alpha, box_hi, rule, rng, support=None):
    return int(klein_pick(c, exponent_weight(rbar_ii, rule), alpha, box_hi,
                          rng.random(), support))


def _back_substitute(prob, choose):
    rbar, qbar, hi = prob.rbar, prob.qbar, prob.box_hi
    m = prob.m
    q = np.zeros(m, dtype=np.int64)
    for t, i in enumerate(range(m - 1, -1, -1)):
        c = qbar[i] + (rbar[i, i + 1:] @ (qbar[i + 1:] - q[i + 1:])) / rbar[i, i]
        q[i] = choose(t, i, c)
    return q


def babai_decode(prob):
    """Greedy nearest-plane decode with per-coordinate box clamping."""
    q = _back_substitute(prob, lambda t, i, c: clamp_round(c, prob.box_hi))
    return Candidate(q, column_residual(prob, q), 0)


def klein_decode(prob, params, rule, rng, support=None, path=1):
    """Randomized back substitution; draws ``m`` uniforms up front, top row first."""
    u = rng.random(prob.m)
    weight = exponent_weight(np.diag(prob.rbar), rule)
    hi = prob.box_hi
    q = _back_substitute(
        prob, lambda t, i, c: klein_pick(c, weight[i], params.alpha, hi, u[t], support)
    )
    return Candidate(q, column_residual(prob, q), path)


def column_alpha(prob, cfg):
    if cfg.alpha is not None:
        return KleinParams(cfg.alpha, math.nan)
    return compute_alpha(cfg.K, prob.m, float(np.min(np.diag(prob.rbar))))


def kbest_candidates(prob, cfg, column=0):
    """Greedy path 0 plus ``cfg.K`` Klein paths with hashed per-path streams."""
    params = column_alpha(prob, cfg)
    support = cfg.K if cfg.topk_support else None
    cands = [babai_decode(prob)]
    for k in range(1, cfg.K + 1):
        rng = path_rng(cfg.seed, column, k)
        cands.append(klein_decode(prob, params, cfg.klein_rule, rng, support, path=k))
    return cands


def select_best(cands):
    """Minimum residual; ties go to the lowest path index."""
    best = cands[0]
    for c in cands[1:]:
        if c.residual < best.residual:
            best = c
    return best


def kbest_decode(prob, cfg, column=0):
    return select_best(kbest_candidates(prob, cfg, column))


__all__ = [
    "Candidate", "KleinParams", "DegenerateTemperature", "babai_decode",
    "klein_decode", "klein_sample_component", "klein_probabilities",
    "compute_alpha", "kbest_decode", "kbest_candidates", "select_best",
    "path_rng", "residuals",
]
