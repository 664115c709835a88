"""Command-line front end: ``bilsquant {quantize,sweep,verify}``."""
import argparse
import itertools
import math
import os
import sys
from pathlib import Path

from . import bqm, report
from .objective import JtaConfig
from .pipeline import LayerError, benchmark_chain, quantize_chain, synthetic_calibration
from .verify import INVARIANTS, run_verify

EXIT_IO = 2
EXIT_SOLVER = 3


class UsageError(ValueError):
    pass


def parse_grid(text, cast=float):
    """``"a,b,c"`` or inclusive range ``"start:stop:step"``."""
    text = (text or "").strip()
    if not text:
        raise UsageError("empty grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad range {text!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise UsageError(f"range step must be positive in {text!r}")
        if stop < start:
            raise UsageError(f"empty range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [cast(round(start + i * step, 12)) for i in range(count)]
    values = [cast(v) for v in text.split(",") if v.strip()]
    if not values:
        raise UsageError("empty grid")
    return values


def _common(p):
    p.add_argument("--calib", type=int, default=64, help="synthetic calibration rows")
    p.add_argument("--wbit", type=int, default=3)
    p.add_argument("--group-size", type=int, default=0)
    p.add_argument("--block-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--klein-rule", choices=("squared", "linear"), default="squared")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser():
    parser = argparse.ArgumentParser(prog="bilsquant", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("quantize", help="quantize a BQM1 model")
    q.add_argument("--model", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--mu", type=float)
    q.add_argument("--lambda", dest="lam", type=float)
    q.add_argument("--k", type=int, default=5)
    _common(q)

    s = sub.add_parser("sweep", help="grid over mu, lambda and K")
    s.add_argument("--model", help="BQM1 model (default: pinned benchmark chain)")
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.add_argument("--mu")
    s.add_argument("--lambda", dest="lam")
    s.add_argument("--k", default="5")
    _common(s)
    s.set_defaults(seed=7)

    v = sub.add_parser("verify", help="decoder-vs-oracle invariant suite")
    v.add_argument("--instances", type=int, default=200)
    v.add_argument("--m", type=int, default=6)
    v.add_argument("--wbit", type=int, default=2)
    v.add_argument("--k", type=int, default=5)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def _config(args, mu, lam, K):
    defaults = JtaConfig.for_wbit(args.wbit)
    return JtaConfig(
        mu=defaults.mu if mu is None else mu,
        lam=defaults.lam if lam is None else lam,
        K=K, wbit=args.wbit, group_size=args.group_size,
        block_size=args.block_size, seed=args.seed, klein_rule=args.klein_rule,
    )


def _load_model(path):
    try:
        return bqm.read_model(path)
    except (OSError, bqm.FormatError) as exc:
        raise UsageError(f"cannot read model {path}: {exc}") from exc


def cmd_quantize(args):
    layers = _load_model(args.model)
    if not layers:
        raise UsageError("model has no layers")
    cfg = _config(args, args.mu, args.lam, args.k)
    X0 = synthetic_calibration(args.calib, layers[0].W.shape[0], args.seed)
    result = quantize_chain(layers, X0, cfg)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        bqm.write_quantized(out / "model.q.bqm", result.layers)
        if args.format == "json":
            bqm.atomic_write(out / "report.json", report.dumps(report.chain_report(cfg, result)))
        else:
            bqm.atomic_write(out / "report.csv", report.csv_text(
                report.layer_rows(cfg, result), report.SWEEP_COLUMNS))
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from exc
    return 0


def cmd_sweep(args):
    if args.model:
        layers = _load_model(args.model)
        X0 = synthetic_calibration(args.calib, layers[0].W.shape[0], args.seed)
    else:
        layers, X0 = benchmark_chain(seed=args.seed, p=args.calib)
    defaults = JtaConfig.for_wbit(args.wbit)
    mus = parse_grid(args.mu) if args.mu is not None else [defaults.mu]
    lams = parse_grid(args.lam) if args.lam is not None else [defaults.lam]
    ks = parse_grid(args.k, int)
    rows = []
    for mu, lam, K in itertools.product(mus, lams, ks):
        cfg = _config(args, mu, lam, K)
        rows.extend(report.layer_rows(cfg, quantize_chain(layers, X0, cfg)))
    text = report.csv_text(rows, report.SWEEP_COLUMNS)
    if args.out:
        try:
            bqm.atomic_write(args.out, text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args):
    counts, failures = run_verify(args.instances, args.m, args.wbit, args.k,
                                  args.seed, args.inject_fault)
    width = max(len(n) for n in INVARIANTS)
    for name in INVARIANTS:
        status = "PASS" if counts[name] == args.instances else "FAIL"
        print(f"{name:<{width}}  {counts[name]:>6}/{args.instances}  {status}")
    for idx, name in failures[:20]:
        print(f"violated {name} on instance {idx} (seed {args.seed}, index {idx})")
    return 1 if failures else 0


COMMANDS = {"quantize": cmd_quantize, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"bilsquant: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LayerError as exc:
        print(f"bilsquant: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"bilsquant: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
