"""JTA target, per-column BILS assembly and scoring.

The stacked system ``A = [Xt; lam*I]``, ``T = [Y*; lam*W]`` is never built;
everything goes through ``Xt.T @ Xt + lam**2 I`` and ``Xt.T @ Y* + lam**2 W``.
"""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .matlin import as_matrix, cholesky, gram_regularized, solve_lower, solve_upper
from .quantgrid import box_hi

KLEIN_RULES = ("squared", "linear")

# (mu, lambda) defaults by bit width; other widths use the 3-bit pair.
PAPER_DEFAULTS = {3: (0.6, 0.6), 4: (0.1, 0.2)}


@dataclass(frozen=True)
class JtaConfig:
    mu: float = 0.6
    lam: float = 0.6
    K: int = 5
    wbit: int = 3
    group_size: int = 0
    block_size: int = 8
    seed: int = 0
    klein_rule: str = "squared"
    # Fixed Klein sharpness; None derives it from (K, m, min diag) per column.
    alpha: Optional[float] = None
    # Restrict Klein sampling to the K integers nearest the center.
    topk_support: bool = False
    # Keep the round-to-nearest column when it scores better than the decoder.
    rtn_guard: bool = True

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must be in [0, 1], got {self.mu}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        if self.klein_rule not in KLEIN_RULES:
            raise ValueError(f"klein_rule must be one of {KLEIN_RULES}")
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    @classmethod
    def for_wbit(cls, wbit, **kw):
        mu, lam = PAPER_DEFAULTS.get(wbit, PAPER_DEFAULTS[3])
        kw.setdefault("mu", mu)
        kw.setdefault("lam", lam)
        return cls(wbit=wbit, **kw)

    def replace(self, **kw):
        return replace(self, **kw)

    @property
    def box_hi(self):
        return box_hi(self.wbit)


@dataclass(frozen=True)
class BilsColumnProblem:
    """min over q in {0..box_hi}^m of ||rbar (q - qbar)||^2."""

    rbar: np.ndarray
    qbar: np.ndarray
    z: np.ndarray
    box_hi: int

    @property
    def m(self):
        return self.qbar.shape[0]


def build_target(X, Xt, W, mu):
    """Interpolated target ``(1 - mu) X W + mu Xt W``."""
    X, Xt, W = as_matrix(X, "X"), as_matrix(Xt, "Xt"), as_matrix(W, "W")
    if X.shape != Xt.shape:
        raise ValueError(f"X {X.shape} and Xt {Xt.shape} differ")
    if X.shape[1] != W.shape[0]:
        raise ValueError(f"X {X.shape} does not compose with W {W.shape}")
    return (1.0 - mu) * (X @ W) + mu * (Xt @ W)


def normal_rhs(Xt, Ystar, W, lam):
    """Columns of ``A.T @ T``: ``Xt.T @ Y* + lam**2 W``."""
    return Xt.T @ Ystar + (lam * lam) * W


def assemble_columns(Xt, X, W, grid, cfg):
    """One :class:`BilsColumnProblem` per column of ``W``.

    Raises :class:`~bilsquant.matlin.NotPositiveDefinite` when
    ``Xt.T Xt + lam**2 I`` is singular.
    """
    W = as_matrix(W, "W")
    if grid.shape != W.shape:
        raise ValueError(f"grid {grid.shape} does not match W {W.shape}")
    Ystar = build_target(X, Xt, W, cfg.mu)
    R = cholesky(gram_regularized(Xt, cfg.lam))
    U = solve_lower(R.T, normal_rhs(Xt, Ystar, W, cfg.lam))
    V = solve_upper(R, U)
    qbar = V / grid.S + grid.Z
    return [
        BilsColumnProblem(
            rbar=R * grid.S[:, j][None, :],
            qbar=qbar[:, j].copy(),
            z=grid.Z[:, j].copy(),
            box_hi=grid.box_hi,
        )
        for j in range(W.shape[1])
    ]


def residuals(rbar, qbar, Q):
    """``||rbar (q - qbar)||^2`` for each row ``q`` of ``Q``.

    Accumulates in a fixed order so a point scores identically whether it is
    evaluated alone or inside a batch.
    """
    D = np.atleast_2d(np.asarray(Q, dtype=np.float64)) - qbar
    m = D.shape[1]
    Y = np.zeros_like(D)
    for j in range(m):
        Y += rbar[:, j] * D[:, j, None]
    out = np.zeros(D.shape[0])
    for i in range(m):
        out += Y[:, i] * Y[:, i]
    return out


def check_in_box(q, hi):
    q = np.asarray(q)
    if q.size and (q.min() < 0 or q.max() > hi):
        raise ValueError(f"q has entries outside [0, {hi}]")
    return q


def column_residual(prob, q):
    check_in_box(q, prob.box_hi)
    return float(residuals(prob.rbar, prob.qbar, np.asarray(q)[None, :])[0])


def jta_score(What, Xt, Ystar, W, lam):
    """``||Xt What - Y*||_F^2 + lam**2 ||What - W||_F^2``."""
    What, Xt = np.asarray(What, np.float64), np.asarray(Xt, np.float64)
    if Xt.shape[1] != What.shape[0] or What.shape != np.shape(W):
        raise ValueError("shape mismatch in jta_score")
    if np.shape(Ystar) != (Xt.shape[0], What.shape[1]):
        raise ValueError("Y* shape mismatch in jta_score")
    return float(np.sum((Xt @ What - Ystar) ** 2) + lam ** 2 * np.sum((What - W) ** 2))
