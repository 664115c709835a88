"""End-to-end error over a (mu, lambda) grid on the benchmark chain."""
import argparse

import numpy as np

from bilsquant.objective import JtaConfig
from bilsquant.pipeline import benchmark_chain, quantize_chain

parser = argparse.ArgumentParser()
parser.add_argument("--seed", type=int, default=7)
parser.add_argument("--wbit", type=int, default=3)
parser.add_argument("--k", type=int, default=5)
args = parser.parse_args()

mus = np.round(np.arange(0.1, 1.01, 0.1), 2)
lams = np.round(np.arange(0.1, 0.81, 0.1), 2)
layers, X0 = benchmark_chain(args.seed)
print("mu\\lam " + " ".join(f"{l:>8.1f}" for l in lams))
for mu in mus:
    row = [quantize_chain(layers, X0, JtaConfig(mu=float(mu), lam=float(lam), K=args.k,
                                                wbit=args.wbit, seed=args.seed)).end_to_end_error
           for lam in lams]
    print(f"{mu:>6.1f} " + " ".join(f"{e:8.5f}" for e in row))
