"""Per-layer runtime ratio of K-best over greedy-only decoding."""
import argparse
import os

from bilsquant.experiments import layer_runtime

parser = argparse.ArgumentParser()
parser.add_argument("--k", default="1,5,25,50")
parser.add_argument("--repeats", type=int, default=9)
args = parser.parse_args()

Ks = [int(k) for k in args.k.split(",")]
base = layer_runtime(1, repeats=args.repeats)
print(f"cpus={os.cpu_count()} BQ_THREADS={os.environ.get('BQ_THREADS', 'auto')}")
for K in Ks:
    t = layer_runtime(K, repeats=args.repeats)
    print(f"K={K:>3}  {t * 1e3:8.3f} ms/layer  ratio {t / base:5.2f}")
