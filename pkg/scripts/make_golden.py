"""Regenerate tests/golden/*.json from the pinned desk experiments."""
import hashlib
import json
from pathlib import Path

import numpy as np

from bilsquant.experiments import k_trend, mu_sweep
from bilsquant.instances import random_layer_system
from bilsquant.objective import JtaConfig
from bilsquant.pipeline import LayerSpec, quantize_layer

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"


def layer_case():
    rng = np.random.default_rng(np.random.SeedSequence([7, 64, 16, 8]))
    X, Xt, W = random_layer_system(64, 16, 8, rng)
    cfg = JtaConfig(wbit=3, K=5, seed=7)
    Q, _, report = quantize_layer(LayerSpec(W), X, Xt, cfg)
    d = report.as_dict()
    d.pop("wall_time")
    d["Q_sha256"] = hashlib.sha256(np.ascontiguousarray(Q, dtype=np.int64).tobytes()).hexdigest()
    return d


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    files = {
        "k_trend.json": {str(k): v for k, v in k_trend().items()},
        "mu_sweep.json": mu_sweep(),
        "layer_report.json": layer_case(),
    }
    for name, data in files.items():
        (GOLDEN / name).write_text(json.dumps(data, indent=2) + "\n")
        print("wrote", GOLDEN / name)


if __name__ == "__main__":
    main()
