"""CSV and JSONL serialization of trajectory records and result tables.

Files are UTF-8 with LF line endings; floats use 17 significant digits so
values round-trip exactly.  Record CSV columns, one row per iteration::

    trajectory_id, iteration, tau, bits, herald, w_dominant, ratio,
    dominant, w_target, step_ratio, restart

``iteration`` counts from 1; ``herald`` and ``restart`` are 0/1; ``step_ratio``
is ``nan`` where the per-round suppression is undefined.  JSONL holds one
trajectory per line with the same fields as arrays (``null`` for ``nan``).
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .harness import COLUMNS, RecordSet

RECORD_COLUMNS = (
    "trajectory_id", "iteration", "tau", "bits", "herald", "w_dominant", "ratio",
    "dominant", "w_target", "step_ratio", "restart",
)
FORMATS = ("csv", "jsonl")
_FLOAT_COLS = ("tau", "w_dominant", "ratio", "w_target", "step_ratio")


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def _fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def _json_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "null" if math.isnan(v) else ("%.17g" % float(v) if math.isfinite(v) else json.dumps(str(v)))
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if v is None:
        return "null"
    return json.dumps(v)


def _open(path):
    if path in (None, "-"):
        return _Stdout()
    try:
        return open(Path(path), "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def records_to_csv(rs: RecordSet) -> str:
    lines = [",".join(RECORD_COLUMNS)]
    c = rs.columns
    bits = rs.labels
    K = rs.iterations
    its = [str(k + 1) for k in range(K)]
    for t in range(len(rs)):
        tid = str(int(rs.trajectory_id[t]))
        cols = [
            [fmt_float(x) for x in c["tau"][t]],
            [bits[j] for j in c["outcome"][t]],
            ["1" if h else "0" for h in c["herald"][t]],
            [fmt_float(x) for x in c["w_dominant"][t]],
            [fmt_float(x) for x in c["ratio"][t]],
            [str(int(x)) for x in c["dominant"][t]],
            [fmt_float(x) for x in c["w_target"][t]],
            [fmt_float(x) for x in c["step_ratio"][t]],
            ["1" if h else "0" for h in c["restart"][t]],
        ]
        for k, row in enumerate(zip(*cols)):
            lines.append(",".join((tid, its[k]) + row))
    return "\n".join(lines) + "\n"


def records_to_jsonl(rs: RecordSet) -> str:
    out = []
    c = rs.columns
    for t in range(len(rs)):
        fields = {
            "trajectory_id": int(rs.trajectory_id[t]),
            "tau": c["tau"][t],
            "bits": [rs.labels[j] for j in c["outcome"][t]],
            "herald": c["herald"][t],
            "w_dominant": c["w_dominant"][t],
            "ratio": c["ratio"][t],
            "dominant": c["dominant"][t],
            "w_target": c["w_target"][t],
            "step_ratio": c["step_ratio"][t],
            "restart": c["restart"][t],
        }
        out.append(_json_value(fields))
    return "".join(line + "\n" for line in out)


def emit(obj, fmt: str = "csv", path=None) -> None:
    """Write a RecordSet, an object with ``to_dict``, or a list of row dicts."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    if isinstance(obj, RecordSet):
        text = records_to_csv(obj) if fmt == "csv" else records_to_jsonl(obj)
    elif hasattr(obj, "to_dict"):
        d = obj.to_dict()
        text = _json_value(d) + "\n" if fmt == "jsonl" else table_text(_flatten(d), None, "csv")
    else:
        text = table_text(list(obj), None, fmt)
    with _open(path) as fh:
        fh.write(text)


def _flatten(d: dict, prefix: str = "") -> list[dict]:
    rows = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_flatten(v, key + "."))
        else:
            rows.append({"key": key, "value": v})
    return rows


def table_text(rows: list[dict], columns=None, fmt: str = "csv") -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    if fmt == "jsonl":
        return "".join(_json_value({c: r.get(c) for c in columns}) + "\n" for r in rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt_value(r.get(c, "")) for c in columns])
    return buf.getvalue()


def write_table(rows: list[dict], columns=None, fmt: str = "csv", path=None) -> None:
    text = table_text(rows, columns, fmt)
    with _open(path) as fh:
        fh.write(text)


# --- parsing ---------------------------------------------------------------

def _assemble(labels, ids, per_traj) -> RecordSet:
    label_index = {b: j for j, b in enumerate(labels)}
    n = len(ids)
    K = len(per_traj[0]["tau"]) if n else 0
    cols = {
        "tau": np.empty((n, K)),
        "outcome": np.empty((n, K), dtype=np.int16),
        "herald": np.empty((n, K), dtype=bool),
        "w_dominant": np.empty((n, K)),
        "ratio": np.empty((n, K)),
        "dominant": np.empty((n, K), dtype=np.int32),
        "w_target": np.empty((n, K)),
        "step_ratio": np.empty((n, K)),
        "restart": np.empty((n, K), dtype=bool),
    }
    for t, rec in enumerate(per_traj):
        if len(rec["tau"]) != K:
            raise ValueError("trajectories have unequal lengths")
        for name in _FLOAT_COLS:
            cols[name][t] = [np.nan if x is None else float(x) for x in rec[name]]
        cols["outcome"][t] = [label_index[b] for b in rec["bits"]]
        cols["herald"][t] = rec["herald"]
        cols["dominant"][t] = rec["dominant"]
        cols["restart"][t] = rec["restart"]
    assert set(cols) == set(COLUMNS)
    return RecordSet(tuple(labels), np.asarray(ids, dtype=np.int64), cols)


def parse_csv(path, labels) -> RecordSet:
    """Read a record CSV back; ``labels`` is the outcome alphabet of the variant."""
    per: dict[int, dict] = {}
    with open(Path(path), encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RECORD_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            tid = int(row["trajectory_id"])
            rec = per.setdefault(tid, {k: [] for k in RECORD_COLUMNS[2:]})
            for name in _FLOAT_COLS:
                rec[name].append(float(row[name]))
            rec["bits"].append(row["bits"])
            rec["herald"].append(row["herald"] == "1")
            rec["dominant"].append(int(row["dominant"]))
            rec["restart"].append(row["restart"] == "1")
    ids = sorted(per)
    return _assemble(labels, ids, [per[i] for i in ids])


def parse_jsonl(path, labels) -> RecordSet:
    ids, per = [], []
    with open(Path(path), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                ids.append(rec["trajectory_id"])
                per.append(rec)
    return _assemble(labels, ids, per)


def records_equal(a: RecordSet, b: RecordSet) -> bool:
    if a.labels != b.labels or not np.array_equal(a.trajectory_id, b.trajectory_id):
        return False
    return all(np.array_equal(a.columns[c], b.columns[c], equal_nan=c in _FLOAT_COLS) for c in COLUMNS)
