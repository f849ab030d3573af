"""Deterministic JSON and CSV serialization of reports.

Field order follows the ``as_dict`` methods (or insertion order for plain
dicts); nested dicts are flattened to dotted column names in CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable

from .errors import ComputationError, PreconditionError

FORMATS = ("json", "csv")


def to_plain(obj: Any) -> Any:
    """Convert reports and numpy scalars to JSON-compatible builtins."""
    if hasattr(obj, "as_dict"):
        return to_plain(obj.as_dict())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if hasattr(obj, "item"):
        return to_plain(obj.item())
    value = float(obj)
    if not math.isfinite(value):
        raise ComputationError(f"cannot serialise non-finite value {value}")
    return value


def flatten(row: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in row.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        elif isinstance(value, list):
            out[name] = json.dumps(value, separators=(",", ":"))
        else:
            out[name] = value
    return out


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def emit_rows(rows: Iterable[dict], fmt: str = "csv") -> str:
    """A list of flat records as CSV (header plus one line each) or a JSON array."""
    rows = [to_plain(r) for r in rows]
    if fmt == "json":
        return json.dumps(rows, indent=2, allow_nan=False) + "\n"
    if fmt != "csv":
        raise PreconditionError(f"format must be one of {FORMATS}")
    flat = [flatten(r) for r in rows]
    header: list[str] = []
    for r in flat:
        for key in r:
            if key not in header:
                header.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in flat:
        writer.writerow([_csv_cell(r.get(k)) for k in header])
    return buf.getvalue()


def emit_report(report: Any, fmt: str = "json") -> str:
    """One report as pretty JSON or as a single CSV row with header."""
    plain = to_plain(report)
    if fmt == "json":
        return json.dumps(plain, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        return emit_rows([plain], "csv")
    raise PreconditionError(f"format must be one of {FORMATS}")
