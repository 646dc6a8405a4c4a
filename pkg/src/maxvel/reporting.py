"""CSV and JSON output with a fixed numeric format and column schema."""
import json
import math
import os
from importlib import resources

import numpy as np

CSV_FORMAT = "%.17g"

ANCHORS = {
    "maxvel": "maximal-velocity-tail",
    "prop-estimate": "propagation-estimate",
    "dyadic": "dyadic-assembly",
    "inequality-suite": "operator-inequalities",
    "baselines": "free-baselines",
    "Q": "dyadic-commutator-term",
    "tail_norm": "maximal-velocity-tail",
    "increments": "propagation-estimate-cauchy",
}


def load_schema():
    with resources.files("maxvel").joinpath("data/csv_schema.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


def csv_columns(kind, series):
    """Column order for an experiment: the schema's fixed columns first, then
    the per-shell columns in index order, then any remaining ones sorted."""
    sch = load_schema()[kind]
    fixed = [c for c in sch["columns"] if c == "t" or c in series.columns]
    pat = sch.get("indexed", [])
    indexed = []
    for p in pat:
        i = 0
        while f"{p}{i}" in series.columns:
            indexed.append(f"{p}{i}")
            i += 1
    rest = sorted(set(series.columns) - set(fixed) - set(indexed))
    return fixed + indexed + rest


def _fmt(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return CSV_FORMAT % v


def write_csv(path, kind, series):
    cols = csv_columns(kind, series)
    lines = [",".join(cols)]
    data = [series.times] + [series.columns[c] for c in cols if c != "t"]
    for row in zip(*data):
        lines.append(",".join(_fmt(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")
    return cols


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        head = fh.readline().strip().split(",")
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {c: arr[:, i] for i, c in enumerate(head)}


def jsonable(v):
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": jsonable(v.real), "im": jsonable(v.imag)}
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return v
    return v


def write_json(path, record):
    _write_text(path, json.dumps(jsonable(record), indent=2, sort_keys=True) + "\n")


def _write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def summarize_dir(root):
    """Collect every JSON summary below root into one listing."""
    out = []
    for dirpath, _, files in sorted(os.walk(root)):
        for f in sorted(files):
            if f.endswith(".json"):
                p = os.path.join(dirpath, f)
                with open(p, encoding="utf-8") as fh:
                    try:
                        rec = json.load(fh)
                    except json.JSONDecodeError as exc:
                        out.append({"file": p, "error": str(exc)})
                        continue
                out.append({"file": os.path.relpath(p, root), "record": rec})
    return out
