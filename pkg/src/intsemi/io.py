"""CSV / JSON serialisation of traces, reports and tables."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .fracint import TimeTrace

CSV_FMT = "{:.17g}"


def jsonable(obj):
    """Plain-Python copy of ``obj`` (arrays to lists, complex to [re, im], inf to strings)."""
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return CSV_FMT.format(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return CSV_FMT.format(v.real) + ("+" if v.imag >= 0 else "-") + CSV_FMT.format(abs(v.imag)) + "j"
    return "" if v is None else str(v)


def write_csv(path, header, rows) -> Path:
    """Floats at 17 significant digits, so values round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open() as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def write_trace(trace: TimeTrace, path) -> tuple[Path, Path]:
    """Trace as CSV (time, norm, then real/imag parts of every entry) plus a JSON sidecar."""
    path = Path(path)
    vals = np.asarray(trace.values)
    flat = vals.reshape(len(trace.t), -1)
    t = np.asarray(trace.t)
    cplx_t = np.iscomplexobj(t)
    header = (["t_re", "t_im"] if cplx_t else ["t"]) + ["norm"]
    header += [f"{p}{j}" for j in range(flat.shape[1]) for p in ("re", "im")]
    norms = trace.norms()
    rows = []
    for i in range(len(t)):
        row = ([t[i].real, t[i].imag] if cplx_t else [float(t[i])]) + [float(norms[i])]
        for v in flat[i]:
            row += [float(np.real(v)), float(np.imag(v))]
        rows.append(row)
    write_csv(path, header, rows)
    side = path.with_suffix(".json")
    write_json({"order": trace.order, "omega": trace.omega, "mesh": trace.mesh, "growth": trace.growth,
                "value_shape": list(vals.shape[1:]), "complex_time": cplx_t, "csv": path.name}, side)
    return path, side


def read_trace(path) -> TimeTrace:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    header, rows = read_csv(path)
    data = np.array([[float(c) for c in row] for row in rows])
    if meta["complex_time"]:
        t = data[:, 0] + 1j * data[:, 1]
        off = 3
    else:
        t = data[:, 0]
        off = 2
    entries = data[:, off::2] + 1j * data[:, off + 1::2]
    values = entries.reshape((len(t),) + tuple(meta["value_shape"]))
    growth = tuple(meta["growth"]) if meta.get("growth") else None
    return TimeTrace(order=meta["order"], t=t, values=values, omega=meta["omega"], mesh=meta["mesh"],
                     growth=growth)


def write_euler_run(run, path) -> Path:
    return write_csv(path, ["n", "error", "runtime_s"], run.csv_rows())


__all__ = ["jsonable", "write_json", "write_csv", "read_csv", "write_trace", "read_trace", "write_euler_run"]
