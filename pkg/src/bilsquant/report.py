"""JSON/CSV report writers; floats carry 17 significant digits."""
import csv
import io
import json
import math

import numpy as np


def _encode(obj):
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    return json.dumps(obj)


def dumps(obj):
    return _encode(obj) + "\n"


def chain_report(cfg, result):
    config = {k: v for k, v in vars(cfg).items()}
    return {
        "config": config,
        "layers": [r.as_dict() for r in result.reports],
        "end_to_end_error": result.end_to_end_error,
        "total_wall_time": result.total_wall_time,
    }


SWEEP_COLUMNS = ("mu", "lambda", "k", "layer", "babai_residual_sum",
                 "kbest_residual_sum", "jta_score", "end_to_end_error", "wall_time")


def csv_text(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def layer_rows(cfg, result):
    return [
        (cfg.mu, cfg.lam, cfg.K, r.layer_index, r.babai_residual_sum,
         r.kbest_residual_sum, r.jta_score_value, result.end_to_end_error, r.wall_time)
        for r in result.reports
    ]
