"""Report serialization: report.csv, meta.json and nodal field dumps."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .benchmarks import ROW_COLUMNS, SweepReport
from .errors import InvalidInputError
from .fields import MeltPool2D, Planar1D, indicator, signed_distance
from .mesh import Cartesian2D

_STR_COLUMNS = {"benchmark", "case", "method", "status", "message"}
_INT_COLUMNS = {"n_i", "n_elements", "steps"}
_BOOL_COLUMNS = {"steady"}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))  # shortest round-trip
    # one physical line per row: control characters become spaces
    return "".join(" " if (ord(ch) < 32 or ord(ch) == 127) else ch for ch in str(value))


def _parse(col, text):
    if text == "":
        return None
    if col in _STR_COLUMNS:
        return text
    if col in _BOOL_COLUMNS:
        return text == "true"
    if col in _INT_COLUMNS:
        return int(text)
    return float(text)


def ensure_writable(directory) -> Path:
    """Create ``directory`` and prove it is writable, before any solve starts."""
    path = Path(directory)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise InvalidInputError(f"output directory {path} is not writable: {exc}") from None
    return path


def report_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(ROW_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in ROW_COLUMNS])
    return buf.getvalue()


def read_report(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return [{c: _parse(c, v) for c, v in zip(header, line)} for line in reader]


def row_name(index: int, row: dict) -> str:
    return f"{index:04d}_{row['benchmark']}_{row['case']}_{row['method']}_eps{row['eps']!r}_ni{row['n_i']}"


def field_csv(fld, eps: Optional[float], geometry=None) -> str:
    """Nodal dump with columns x[,y], T, chi, d."""
    mesh = fld.mesh
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    if isinstance(mesh, Cartesian2D):
        geometry = geometry or MeltPool2D()
        pts = mesh.coordinates
        d = np.asarray(signed_distance(pts, geometry))
        cols = [pts[:, 0], pts[:, 1]]
        w.writerow(["x", "y", "T", "chi", "d"])
    else:
        geometry = geometry or Planar1D()
        pts = mesh.nodes
        d = np.asarray(signed_distance(pts, geometry))
        cols = [pts]
        w.writerow(["x", "T", "chi", "d"])
    chi = np.asarray(indicator(d, eps)) if eps else (d <= 0.0).astype(float)
    for vals in zip(*cols, fld.values, chi, d):
        w.writerow([repr(float(v)) for v in vals])
    return buf.getvalue()


def write_report(report, directory, *, config=None, started=None, finished=None,
                 fields: Optional[dict] = None, extra_meta: Optional[dict] = None) -> dict:
    """Write report.csv, meta.json and optional fields/<row>.csv files.

    ``fields`` maps row index to (DiscreteField, eps).  Returns the written paths.
    """
    rows = report.rows if isinstance(report, SweepReport) else list(report)
    out = ensure_writable(directory)
    paths = {"report": out / "report.csv", "meta": out / "meta.json", "fields": []}
    paths["report"].write_text(report_csv(rows), newline="")

    if fields:
        fdir = out / "fields"
        fdir.mkdir(exist_ok=True)
        for i, (fld, eps) in sorted(fields.items()):
            p = fdir / f"{row_name(i, rows[i])}.csv"
            p.write_text(field_csv(fld, eps), newline="")
            paths["fields"].append(p)

    from . import __version__

    now = datetime.now(timezone.utc).isoformat()
    meta = {
        "tool": "csfmelt",
        "version": __version__,
        "started": started or now,
        "finished": finished or now,
        "config": config.to_document() if hasattr(config, "to_document") else config,
        "columns": list(ROW_COLUMNS),
        "rows": [{"index": i, "name": row_name(i, r), "status": r.get("status"),
                  "wall_time": r.get("wall_time")} for i, r in enumerate(rows)],
    }
    if any(r.get("benchmark") == "B4" for r in rows):
        meta["mesh_note"] = ("B4 uses a uniform 512 x 512 Cartesian mesh (h = 0.390625 um) "
                             "instead of a locally refined mesh")
    if extra_meta:
        meta.update(extra_meta)
    tmp = paths["meta"].with_suffix(".json.tmp")
    tmp.write_text(json.dumps(meta, indent=2, default=_json_default))
    os.replace(tmp, paths["meta"])
    return paths


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
