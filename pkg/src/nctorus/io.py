"""File formats: element JSON, flow traces as JSONL, report JSON with a CSV twin.

Every write goes to a temporary file in the target directory and is moved
into place with ``os.replace``, so readers never see a half-written file.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from . import algebra as alg
from .algebra import FourierElement
from .flow import FlowTrace
from .reports import SummaryReport


def fmt_theta(theta: float) -> str:
    """``theta`` with 17 significant digits, enough to round-trip a double."""
    return format(theta, ".17g")


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False)


# -- elements ----------------------------------------------------------------------

def element_to_dict(a: FourierElement) -> dict:
    entries = [[m, n, a.coeff(m, n).real, a.coeff(m, n).imag] for m, n in a.support()]
    return {"theta": fmt_theta(a.theta), "bandwidth": a.bandwidth, "entries": entries}


def element_from_dict(data: dict, theta: float | None = None,
                      bandwidth: int | None = None) -> FourierElement:
    """Parse ``{theta, bandwidth, entries: [[m, n, re, im], ...]}``.

    ``theta`` and ``bandwidth`` override the file when given; the file value
    must then agree bit-for-bit on ``theta``.
    """
    if not isinstance(data, dict) or "entries" not in data:
        raise ValueError("element file must be a JSON object with an 'entries' array")
    file_theta = data.get("theta")
    if file_theta is not None:
        file_theta = float(file_theta)
    if theta is None:
        if file_theta is None:
            raise ValueError("element file has no theta and none was configured")
        theta = file_theta
    elif file_theta is not None and file_theta != theta:
        raise ValueError(f"element file theta {file_theta!r} differs from configured theta {theta!r}")
    entries = []
    for row in data["entries"]:
        if len(row) != 4:
            raise ValueError(f"entry {row!r} is not [m, n, re, im]")
        m, n, re, im = row
        if int(m) != m or int(n) != n:
            raise ValueError(f"entry {row!r} has non-integer mode")
        entries.append((int(m), int(n), complex(float(re), float(im))))
    if bandwidth is None:
        bandwidth = data.get("bandwidth")
    if bandwidth is None:
        bandwidth = max([alg.DEFAULT_BANDWIDTH] + [max(abs(m), abs(n)) for m, n, _ in entries])
    return alg.from_entries(theta, entries, int(bandwidth))


def load_element(path, theta: float | None = None, bandwidth: int | None = None) -> FourierElement:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return element_from_dict(data, theta, bandwidth)


def save_element(path, a: FourierElement) -> Path:
    return atomic_write_text(path, dumps(element_to_dict(a)) + "\n")


# -- flow traces -------------------------------------------------------------------

def trace_to_jsonl(trace: FlowTrace, header: dict | None = None) -> str:
    lines = [json.dumps(_jsonable({"type": "config", **(header or {}),
                                   "flow": trace.config.to_dict()}))]
    for r in trace.records:
        lines.append(json.dumps(_jsonable({"type": "record", **r.to_dict()})))
    lines.append(json.dumps(_jsonable({"type": "summary", **trace.summary()})))
    return "\n".join(lines) + "\n"


def save_trace(path, trace: FlowTrace, header: dict | None = None) -> Path:
    return atomic_write_text(path, trace_to_jsonl(trace, header))


def read_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


# -- reports -----------------------------------------------------------------------

def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    fields = list(dict.fromkeys(k for row in rows for k in row))
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _jsonable(v) for k, v in row.items()})
    return buf.getvalue()


def csv_twin(path) -> Path:
    path = Path(path)
    return path.with_suffix(".csv") if path.suffix != ".csv" else path.with_suffix(".rows.csv")


def save_report(path, report: SummaryReport | dict) -> tuple[Path, Path | None]:
    """Write the JSON report and, when it has table rows, a CSV twin next to it."""
    data = report.to_dict() if isinstance(report, SummaryReport) else report
    out = atomic_write_text(path, dumps(data) + "\n")
    rows = data.get("rows") or []
    if rows:
        return out, atomic_write_text(csv_twin(path), rows_to_csv(rows))
    return out, None
