"""Seeded random BILS instances for tests, verification and experiments."""
import numpy as np

from .objective import BilsColumnProblem
from .quantgrid import box_hi


def instance_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index), 0x8115]))


def random_upper(m, rng, cond_max=1e3):
    """Dense upper-triangular factor with positive diagonal and 2-norm condition <= cond_max."""
    while True:
        spread = rng.uniform(0, np.log10(cond_max))
        diag = 10.0 ** rng.uniform(-spread / 2, spread / 2, size=m)
        R = np.triu(rng.standard_normal((m, m)) * 0.5 * diag[:, None], 1)
        R[np.diag_indices(m)] = diag
        if np.linalg.cond(R) <= cond_max:
            return R


def random_problem(m, wbit, rng, cond_max=1e3, rbar=None):
    hi = box_hi(wbit)
    R = random_upper(m, rng, cond_max) if rbar is None else rbar
    qbar = rng.uniform(-0.5, hi + 0.5, size=m)
    return BilsColumnProblem(R, qbar, np.zeros(m), hi)


def diagonal_problem(m, wbit, rng):
    """Diagonal factor with every rounded center inside the box."""
    hi = box_hi(wbit)
    R = np.diag(10.0 ** rng.uniform(-1, 1, size=m))
    qbar = rng.uniform(-0.49, hi + 0.49, size=m)
    return BilsColumnProblem(R, qbar, np.zeros(m), hi)


def decaying_problem(m, wbit, rng, decay=0.2):
    """Dense factor whose diagonal shrinks by ``decay`` per row."""
    hi = box_hi(wbit)
    diag = decay ** np.arange(m)
    R = np.triu(rng.standard_normal((m, m)) * diag[:, None], 1)
    R[np.diag_indices(m)] = diag
    qbar = rng.uniform(-0.5, hi + 0.5, size=m)
    return BilsColumnProblem(R, qbar, np.zeros(m), hi)


def random_layer_system(p, m, n, rng, drift=0.1):
    """``(X, Xt, W)`` with Xt a perturbed copy of X."""
    X = rng.standard_normal((p, m))
    Xt = X + drift * rng.standard_normal((p, m))
    W = rng.standard_normal((m, n)) / np.sqrt(m)
    return X, Xt, W
