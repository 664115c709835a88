"""Path-isolated K-best Babai with blocked look-ahead updates.

All ``K + 1`` paths of all columns advance together. Every path owns its slice
of the center buffer ``C`` and integer buffer ``Q``; nothing is shared across
the path axis, so one path's draws never reach another path's centers.

Rows are processed bottom-up in blocks of ``B``. On entering block ``J`` the
contribution of every finished row ``F`` is folded in with one batched matmul,

    C[:, J] += (Rbar[J, F] @ (qbar[F] - Q[:, F])) / diag(Rbar)[J]

and the rows inside ``J`` then pick up their in-block neighbours one at a time.
The two pieces add up to the sequential Babai/Klein center, so the integer
output matches :func:`bilsquant.decoder.kbest_decode` for any ``B``.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .decoder import Candidate, column_alpha, exponent_weight, klein_pick, path_rng
from .objective import residuals
from .quantgrid import clamp_round


@dataclass
class PathBuffers:
    C: np.ndarray          # (P, m, n) centers
    Q: np.ndarray          # (P, m, n) integers; path 0 is greedy
    residual: np.ndarray   # (P, n)


def thread_count():
    n = int(os.environ.get("BQ_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def draw_uniforms(seed, columns, n_random, m):
    """``U[k-1, t, j]``: t-th uniform of path k in column ``columns[j]``."""
    U = np.empty((n_random, m, len(columns)))
    for j, col in enumerate(columns):
        for k in range(1, n_random + 1):
            U[k - 1, :, j] = path_rng(seed, col, k).random(m)
    return U


def ppi_kernel(rbar, qbar, box_hi, alpha, U, block_size, rule="squared", support=None):
    """Run greedy path 0 plus ``U.shape[0]`` Klein paths.

    rbar: (n, m, m) scaled factors, qbar: (m, n), alpha: (n,), U: (K, m, n).
    """
    n, m, _ = rbar.shape
    P = U.shape[0] + 1
    C = np.repeat(qbar[None], P, axis=0)
    Q = np.zeros((P, m, n), dtype=np.int64)
    diag = np.stack([np.diag(r) for r in rbar], axis=1)          # (m, n)
    weight = exponent_weight(diag, rule)
    B = max(1, int(block_size))
    for top in range(m, 0, -B):
        lo = max(top - B, 0)
        if top < m:
            delta = qbar[None, top:] - Q[:, top:, :]               # (P, |F|, n)
            upd = rbar[:, lo:top, top:] @ delta.transpose(2, 1, 0)  # (n, |J|, P)
            C[:, lo:top, :] += upd.transpose(2, 1, 0) / diag[None, lo:top]
        for i in range(top - 1, lo - 1, -1):
            if i + 1 < top:
                delta = qbar[None, i + 1:top] - Q[:, i + 1:top, :]
                local = np.einsum("jb,pbj->pj", rbar[:, i, i + 1:top], delta)
                C[:, i, :] += local / diag[None, i]
            Q[0, i] = clamp_round(C[0, i], box_hi)
            if P > 1:
                Q[1:, i] = klein_pick(C[1:, i], weight[i], alpha, box_hi,
                                      U[:, m - 1 - i], support)
    return C, Q


def ppi_paths(probs, cfg, columns=None, block_size=None, n_random=None):
    """All candidate paths for ``probs``; columns are indexed by ``columns``."""
    if not probs:
        raise ValueError("no column problems")
    columns = list(range(len(probs))) if columns is None else list(columns)
    m = probs[0].m
    box_hi = probs[0].box_hi
    n_random = cfg.K if n_random is None else n_random
    rbar = np.stack([p.rbar for p in probs])
    qbar = np.stack([p.qbar for p in probs], axis=1)
    if n_random > 0:
        alpha = np.array([column_alpha(p, cfg).alpha for p in probs])
    else:
        alpha = np.full(len(probs), math.inf)
    U = draw_uniforms(cfg.seed, columns, n_random, m)
    support = cfg.K if cfg.topk_support else None
    C, Q = ppi_kernel(rbar, qbar, box_hi, alpha, U,
                      cfg.block_size if block_size is None else block_size,
                      cfg.klein_rule, support)
    res = np.stack(
        [residuals(p.rbar, p.qbar, Q[:, :, j]) for j, p in enumerate(probs)], axis=1
    )
    return PathBuffers(C, Q, res)


def best_of(buf):
    """Per-column minimum-residual candidate, first path wins ties."""
    best = np.argmin(buf.residual, axis=0)
    return [
        Candidate(buf.Q[k, :, j].copy(), float(buf.residual[k, j]), int(k))
        for j, k in enumerate(best)
    ]


def ppi_kbabai(probs, cfg, threads=None):
    """Best candidate per column, columns split across ``threads`` workers."""
    return [c for _, c in ppi_decode(probs, cfg, threads)]


def ppi_decode(probs, cfg, threads=None):
    """``(greedy, best)`` candidate pairs per column."""
    n = len(probs)
    threads = min(thread_count() if threads is None else threads, n) or 1
    bounds = np.linspace(0, n, threads + 1).astype(int)
    chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def run(cols):
        buf = ppi_paths([probs[j] for j in cols], cfg, columns=cols)
        greedy = [Candidate(buf.Q[0, :, j].copy(), float(buf.residual[0, j]), 0)
                  for j in range(len(cols))]
        return list(zip(greedy, best_of(buf)))

    if len(chunks) == 1:
        return run(chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(run, chunks))
    return [pair for part in parts for pair in part]
