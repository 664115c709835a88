"""Decoder-vs-oracle invariant checks on seeded random instances."""
import math
from collections import OrderedDict

import numpy as np

from .decoder import (KleinParams, babai_decode, kbest_candidates, klein_decode,
                      path_rng)
from .instances import instance_rng, random_problem
from .objective import JtaConfig
from .oracle import brute_force_bils, sphere_decode
from .parallel import best_of, ppi_paths

INVARIANTS = (
    "oracle<=babai",
    "oracle<=kbest",
    "kbest<=babai",
    "sphere==brute",
    "klein(inf)==babai",
    "ppi==kbest",
)


def _select(cands, flip):
    best = cands[0]
    for c in cands[1:]:
        if (c.residual > best.residual) if flip else (c.residual < best.residual):
            best = c
    return best


def check_instance(prob, cfg, column=0, inject_fault=False):
    """Map invariant name -> bool for one problem."""
    exact = brute_force_bils(prob)
    babai = babai_decode(prob)
    kbest = _select(kbest_candidates(prob, cfg, column), inject_fault)
    sphere = sphere_decode(prob)
    greedy = klein_decode(prob, KleinParams(math.inf, math.inf), cfg.klein_rule,
                          path_rng(cfg.seed, column, 1))
    ppi = best_of(ppi_paths([prob], cfg, columns=[column]))[0]
    return OrderedDict([
        ("oracle<=babai", exact.residual <= babai.residual),
        ("oracle<=kbest", exact.residual <= kbest.residual),
        ("kbest<=babai", kbest.residual <= babai.residual),
        ("sphere==brute", np.array_equal(sphere.q, exact.q)),
        ("klein(inf)==babai", np.array_equal(greedy.q, babai.q)),
        ("ppi==kbest", np.array_equal(ppi.q, kbest.q)),
    ])


def run_verify(instances=200, m=6, wbit=2, K=5, seed=0, inject_fault=False, m_min=2):
    """Returns ``(counts, failures)``; failures lists ``(instance_index, invariant)``."""
    cfg = JtaConfig(K=K, wbit=wbit, seed=seed)
    counts = OrderedDict((name, 0) for name in INVARIANTS)
    failures = []
    for i in range(instances):
        rng = instance_rng(seed, i)
        dim = int(rng.integers(m_min, m + 1)) if m_min < m else m
        prob = random_problem(dim, wbit, rng)
        for name, ok in check_instance(prob, cfg, i, inject_fault).items():
            if ok:
                counts[name] += 1
            else:
                failures.append((i, name))
    return counts, failures
