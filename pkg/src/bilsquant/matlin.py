"""Dense kernels for the decoders: regularized Gram, Cholesky, triangular solves.

Matrices are plain float64 ``numpy`` arrays. Nothing here forms an inverse.
"""
import numpy as np


class NotPositiveDefinite(ArithmeticError):
    """Raised when a Cholesky pivot collapses; raise the regularizer lambda."""

    def __init__(self, index, pivot):
        self.index = index
        self.pivot = pivot
        super().__init__(
            f"matrix is not positive definite (pivot {index} = {pivot:.3e}); "
            "increase lambda"
        )


def as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def gram_regularized(Xt, lam):
    """Return ``Xt.T @ Xt + lam**2 * I``, symmetrized."""
    Xt = as_matrix(Xt, "Xt")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    p, m = Xt.shape
    if p < 1 or m < 1:
        raise ValueError("Xt must be non-empty")
    G = Xt.T @ Xt
    G = 0.5 * (G + G.T)
    G[np.diag_indices(m)] += lam * lam
    return G


def cholesky(G):
    """Upper-triangular ``R`` with ``R.T @ R == G``.

    Row-oriented outer-product form. A pivot at or below
    ``m * eps * max|G|`` raises :class:`NotPositiveDefinite`; no jitter is added.
    """
    G = as_matrix(G, "G")
    m = G.shape[0]
    if G.shape != (m, m):
        raise ValueError(f"G must be square, got {G.shape}")
    tol = m * np.finfo(np.float64).eps * np.max(np.abs(G))
    R = np.zeros_like(G)
    for j in range(m):
        col = R[:j, j]
        pivot = G[j, j] - col @ col
        if not pivot > tol:
            raise NotPositiveDefinite(j, pivot)
        d = np.sqrt(pivot)
        R[j, j] = d
        if j + 1 < m:
            R[j, j + 1:] = (G[j, j + 1:] - col @ R[:j, j + 1:]) / d
    return R


def _check_triangular(R, b):
    R = np.asarray(R, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m = R.shape[0]
    if R.shape != (m, m) or b.shape[0] != m:
        raise ValueError(f"shape mismatch: R {R.shape}, b {b.shape}")
    if np.any(np.diag(R) == 0.0):
        raise ZeroDivisionError("triangular factor has a zero diagonal entry")
    return R, b


def solve_lower(L, b):
    """Forward substitution for lower-triangular ``L`` (pass ``R.T``).

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    L, b = _check_triangular(L, b)
    x = np.array(b, dtype=np.float64, copy=True)
    for i in range(L.shape[0]):
        x[i] = (x[i] - L[i, :i] @ x[:i]) / L[i, i]
    return x


def solve_upper(R, b):
    """Back substitution for upper-triangular ``R``."""
    R, b = _check_triangular(R, b)
    m = R.shape[0]
    x = np.array(b, dtype=np.float64, copy=True)
    for i in range(m - 1, -1, -1):
        x[i] = (x[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
    return x
