"""Mean per-layer K-best residual vs K on the pinned benchmark chain."""
import argparse
import json

from bilsquant.experiments import k_trend

parser = argparse.ArgumentParser()
parser.add_argument("--k", default="1,5,25,50")
parser.add_argument("--seed", type=int, default=7)
parser.add_argument("--wbit", type=int, default=3)
parser.add_argument("--out")
args = parser.parse_args()

res = k_trend([int(k) for k in args.k.split(",")], seed=args.seed, wbit=args.wbit)
for K, row in res.items():
    print(f"K={K:>3}  mean kbest residual {row['mean_kbest_residual']:.6f}  "
          f"e2e {row['end_to_end_error']:.5f}")
if args.out:
    with open(args.out, "w") as fh:
        json.dump({str(k): v for k, v in res.items()}, fh, indent=2)
