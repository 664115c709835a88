"""Exact BILS solvers for small instances: enumeration and Schnorr-Euchner search."""
import itertools

import numpy as np

from .decoder import Candidate, babai_decode
from .objective import column_residual, residuals
from .quantgrid import clamp_round

BRUTE_FORCE_LIMIT = 1 << 20
SPHERE_MAX_DIM = 24
_CHUNK = 1 << 14


class TooLarge(ValueError):
    pass


def brute_force_bils(prob):
    """Global minimum over the whole box; ties go to the lexicographically smallest q."""
    m, hi = prob.m, prob.box_hi
    if (hi + 1) ** m > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"(box_hi + 1)^m = {(hi + 1) ** m} exceeds {BRUTE_FORCE_LIMIT}")
    points = itertools.product(range(hi + 1), repeat=m)
    best_q, best_r = None, np.inf
    while True:
        block = np.array(list(itertools.islice(points, _CHUNK)), dtype=np.int64)
        if block.size == 0:
            break
        r = residuals(prob.rbar, prob.qbar, block)
        k = int(np.argmin(r))
        if r[k] < best_r:
            best_q, best_r = block[k].copy(), float(r[k])
    return Candidate(best_q, best_r, -1)


class SphereStats:
    def __init__(self):
        self.leaves = 0
        self.nodes = 0
        self.first_leaf = None


def sphere_decode(prob, radius_init=None, stats=None):
    """Depth-first Schnorr-Euchner enumeration inside the box.

    The search radius starts at the Babai residual (or ``radius_init``) and
    shrinks at every improving leaf. Leaves are scored with the same residual
    routine as the brute-force oracle; ties go to the lexicographically
    smallest q so both oracles agree exactly.
    """
    m, hi = prob.m, prob.box_hi
    if m > SPHERE_MAX_DIM:
        raise TooLarge(f"m = {m} exceeds {SPHERE_MAX_DIM}")
    stats = stats if stats is not None else SphereStats()
    rbar, qbar = prob.rbar, prob.qbar
    diag2 = np.diag(rbar) ** 2
    babai = babai_decode(prob)
    best = {"q": babai.q.copy(), "r": babai.residual}
    radius = babai.residual if radius_init is None else max(radius_init, babai.residual)
    best["radius"] = radius
    q = np.zeros(m, dtype=np.int64)
    values = np.arange(hi + 1)

    def slack(r):
        return r * (1 + 1e-9) + 1e-12

    def visit(i, partial):
        c = qbar[i] + (rbar[i, i + 1:] @ (qbar[i + 1:] - q[i + 1:])) / rbar[i, i]
        first = int(clamp_round(c, hi))
        rest = values[values != first]
        order = [first] + list(rest[np.argsort(np.abs(rest - c), kind="stable")])
        for v in order:
            d = partial + diag2[i] * (v - c) ** 2
            if d > slack(best["radius"]):
                break
            stats.nodes += 1
            q[i] = v
            if i == 0:
                stats.leaves += 1
                if stats.first_leaf is None:
                    stats.first_leaf = q.copy()
                r = column_residual(prob, q)
                if r < best["r"] or (r == best["r"] and tuple(q) < tuple(best["q"])):
                    best["q"], best["r"] = q.copy(), r
                    best["radius"] = r
            else:
                visit(i - 1, d)
        q[i] = 0

    visit(m - 1, 0.0)
    return Candidate(best["q"], best["r"], -1)
