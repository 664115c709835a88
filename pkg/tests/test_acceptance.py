"""Exit criteria. Each test prints one PASS/FAIL line and asserts at its stated tolerance."""
import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from bilsquant.cli import main
from bilsquant import bqm
from bilsquant.decoder import (babai_decode, compute_alpha, kbest_decode,
                               klein_probabilities, klein_sample_component)
from bilsquant.experiments import k_trend, layer_runtime
from bilsquant.instances import (diagonal_problem, instance_rng, random_layer_system,
                                 random_problem)
from bilsquant.objective import (JtaConfig, assemble_columns, build_target,
                                 column_residual, jta_score)
from bilsquant.oracle import brute_force_bils
from bilsquant.parallel import ppi_kbabai, ppi_paths
from bilsquant.pipeline import random_chain
from bilsquant.quantgrid import calibrate_minmax, dequantize

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def verdict(capsys):
    def emit(name, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"
    return emit


def test_oracle_dominance(verdict):
    t0 = time.perf_counter()
    bad = 0
    for i in range(1000):
        rng = instance_rng(1, i)
        p = random_problem(int(rng.integers(2, 7)), 2, rng, cond_max=1e3)
        opt = brute_force_bils(p).residual
        b = babai_decode(p).residual
        k = kbest_decode(p, JtaConfig(K=5, wbit=2, seed=i)).residual
        bad += not (opt <= b and opt <= k)
    dt = time.perf_counter() - t0
    verdict("oracle dominance", bad == 0 and dt < 60,
            f"{1000 - bad}/1000 instances, {dt:.1f}s (< 60s)")


def test_diagonal_exactness(verdict):
    bad = 0
    for i in range(200):
        rng = instance_rng(2, i)
        p = diagonal_problem(int(rng.integers(1, 7)), 2, rng)
        b, o = babai_decode(p), brute_force_bils(p)
        bad += not (np.array_equal(b.q, o.q) and b.residual == o.residual)
    verdict("diagonal exactness", bad == 0, f"{200 - bad}/200 exact")


def test_kbest_dominance_and_nested_monotonicity(verdict):
    Ks = (1, 2, 5, 10, 25)
    dom_bad = nest_bad = rule_nest_bad = 0
    for i in range(500):
        rng = instance_rng(3, i)
        p = random_problem(int(rng.integers(2, 7)), 2, rng)
        b = babai_decode(p).residual
        rule = [kbest_decode(p, JtaConfig(K=K, wbit=2, seed=i)).residual for K in Ks]
        dom_bad += any(r > b for r in rule)
        rule_nest_bad += any(y > x for x, y in zip(rule, rule[1:]))
        # Nested family: one temperature for every K so the K-path set is a
        # prefix of the K'-path set.
        alpha = compute_alpha(Ks[-1], p.m, float(np.min(np.diag(p.rbar)))).alpha
        nested = [kbest_decode(p, JtaConfig(K=K, wbit=2, seed=i, alpha=alpha)).residual for K in Ks]
        nest_bad += any(y > x for x, y in zip(nested, nested[1:]))
        dom_bad += any(r > b for r in nested)
    verdict("k-best dominance + nested monotonicity", dom_bad == 0 and nest_bad == 0,
            f"dominance {500 - dom_bad}/500, nested (shared temperature) {500 - nest_bad}/500; "
            f"informational: per-K temperature nested {500 - rule_nest_bad}/500")


def _merged_chisquare(counts, expected):
    order = np.argsort(-expected)
    obs, exp = [], []
    o_acc = e_acc = 0.0
    for k in order:
        o_acc += counts[k]
        e_acc += expected[k]
        if e_acc >= 5:
            obs.append(o_acc)
            exp.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0:
        if exp:
            obs[-1] += o_acc
            exp[-1] += e_acc
        else:
            obs.append(o_acc)
            exp.append(e_acc)
    if len(exp) < 2:
        return 1.0
    return stats.chisquare(obs, exp).pvalue


def test_klein_distribution_fidelity(verdict):
    rng = np.random.default_rng(404)
    n, pvals = 10000, []
    for t in range(20):
        hi = int(rng.choice([1, 3, 7, 15]))
        c = float(rng.uniform(-1, hi + 1))
        r = float(10 ** rng.uniform(-1, 0.5))
        a = float(10 ** rng.uniform(-1.5, 0.7))
        rule = "squared" if t % 2 == 0 else "linear"
        draw = np.random.default_rng([404, t])
        samples = [klein_sample_component(c, r, a, hi, rule, draw) for _ in range(n)]
        # closed form without max-subtraction as the independent reference
        g = r * r if rule == "squared" else r
        w = np.array([math.exp(-a * g * (c - v) ** 2) for v in range(hi + 1)])
        expected = n * w / w.sum()
        np.testing.assert_allclose(w / w.sum(), klein_probabilities(c, r, a, hi, rule), rtol=1e-12)
        pvals.append(_merged_chisquare(np.bincount(samples, minlength=hi + 1), expected))
    ok = min(pvals) > 1e-3
    verdict("klein distribution fidelity", ok,
            f"20 triples, min chi-square p = {min(pvals):.4g} (> 0.001)")


def test_alpha_rule(verdict):
    worst = 0.0
    for K in (2, 5, 25):
        for m in (4, 16, 64):
            rho = compute_alpha(K, m, 1.0).rho
            worst = max(worst, abs(K - (math.e * rho) ** (2 * m / rho)) / K)
    greedy_bad = 0
    for i in range(100):
        rng = instance_rng(5, i)
        p = random_problem(int(rng.integers(2, 9)), 3, rng)
        greedy_bad += not np.array_equal(kbest_decode(p, JtaConfig(K=1, wbit=3, seed=i)).q,
                                         babai_decode(p).q)
    verdict("alpha rule", worst <= 1e-9 and greedy_bad == 0,
            f"max |K-(e rho)^(2m/rho)|/K = {worst:.2e} (<= 1e-9); K=1 == Babai {100 - greedy_bad}/100")


def test_ppi_equivalence(verdict):
    bad = 0
    for i in range(100):
        rng = instance_rng(6, i)
        X, Xt, W = random_layer_system(32, 8, 5, rng)
        cfg = JtaConfig(K=3, wbit=3, seed=i)
        probs = assemble_columns(Xt, X, W, calibrate_minmax(W, 3), cfg)
        ref = np.stack([kbest_decode(p, cfg, column=j).q for j, p in enumerate(probs)], axis=1)
        got = np.stack([c.q for c in ppi_kbabai(probs, cfg)], axis=1)
        Qs = [ppi_paths(probs, cfg, block_size=B).Q for B in (1, 2, 8)]
        bad += not (np.array_equal(ref, got) and all(np.array_equal(Qs[0], Q) for Q in Qs[1:]))
    verdict("ppi-kbabai equivalence", bad == 0, f"{100 - bad}/100 systems bit-identical (B in 1,2,m)")


def test_objective_decomposition(verdict):
    worst = 0.0
    for i in range(50):
        rng = instance_rng(7, i)
        X, Xt, W = random_layer_system(12, 5, 4, rng)
        cfg = JtaConfig(mu=float(rng.uniform()), lam=float(rng.uniform(0, 1)), wbit=3)
        grid = calibrate_minmax(W, 3)
        probs = assemble_columns(Xt, X, W, grid, cfg)
        Y = build_target(X, Xt, W, cfg.mu)
        Q1, Q2 = rng.integers(0, 8, (2,) + W.shape)
        ds = (jta_score(dequantize(Q1, grid), Xt, Y, W, cfg.lam)
              - jta_score(dequantize(Q2, grid), Xt, Y, W, cfg.lam))
        dr = sum(column_residual(p, Q1[:, j]) - column_residual(p, Q2[:, j])
                 for j, p in enumerate(probs))
        worst = max(worst, abs(ds - dr) / max(abs(ds), 1e-300))
    verdict("objective decomposition", worst <= 1e-8, f"max relative gap {worst:.2e} (<= 1e-8)")


def test_config_reductions(verdict):
    bad = 0
    for i in range(20):
        rng = instance_rng(8, i)
        X, Xt, W = random_layer_system(10, 5, 3, rng)
        What = W + 0.05 * rng.standard_normal(W.shape)
        rt = np.sum((Xt @ What - Xt @ W) ** 2)
        mm = np.sum((Xt @ What - X @ W) ** 2)
        bad += jta_score(What, Xt, build_target(X, Xt, W, 1.0), W, 0.0) != rt
        bad += jta_score(What, Xt, build_target(X, Xt, W, 0.0), W, 0.0) != mm
    verdict("config reductions", bad == 0, f"{40 - bad}/40 exact (0 ulp)")


def test_residual_vs_k_trend(verdict):
    res = k_trend((1, 5, 25, 50), seed=7)
    golden = json.loads((GOLDEN / "k_trend.json").read_text())
    means = [res[K]["mean_kbest_residual"] for K in (1, 5, 25, 50)]
    pinned = all(
        math.isclose(res[K]["mean_kbest_residual"], golden[str(K)]["mean_kbest_residual"], rel_tol=1e-9)
        for K in (1, 5, 25, 50)
    )
    monotone = all(b <= a for a, b in zip(means, means[1:]))
    first_gain = means[0] - means[1] > 0
    verdict("residual-vs-K trend", pinned and monotone and first_gain,
            "means " + ", ".join(f"K={K}:{v:.4f}" for K, v in zip((1, 5, 25, 50), means))
            + f"; golden match={pinned}; non-increasing={monotone}; K1->5 gain={first_gain}")


def test_runtime_overhead(verdict, capsys):
    t1 = layer_runtime(1, repeats=9)
    t25 = layer_runtime(25, repeats=9)
    ratio = t25 / t1
    cpus = os.cpu_count() or 1
    if cpus < 4:
        with capsys.disabled():
            print(f"\n[INFO] runtime overhead: K=25/K=1 = {ratio:.2f}x on {cpus} cpu(s); "
                  "not gated below 4 hardware threads")
        pytest.skip(f"informational on {cpus} cpu(s): ratio {ratio:.2f}")
    verdict("runtime overhead", ratio <= 2.0, f"K=25/K=1 = {ratio:.2f}x (<= 2.0)")


def test_quantize_determinism(verdict, tmp_path):
    model = tmp_path / "m.bqm"
    bqm.write_model(model, random_chain((16, 16, 16, 8), seed=7))
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["quantize", "--model", str(model), "--out", str(out), "--calib", "64",
                     "--k", "5", "--seed", "7"]) == 0
        outs.append((out / "model.q.bqm").read_bytes())
    verdict("determinism", outs[0] == outs[1], f"BQQ1 files identical ({len(outs[0])} bytes)")
