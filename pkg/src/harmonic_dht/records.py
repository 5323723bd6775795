"""CSV / JSON emission of experiment records.

CSV files start with a ``# {...}`` line holding the resolved configuration as
JSON, followed by a header row and one row per record. Floats are written
with 6 significant digits in both formats.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
from pathlib import Path


class EmitError(RuntimeError):
    pass


def _as_dict(rec) -> dict:
    if dataclasses.is_dataclass(rec):
        return dataclasses.asdict(rec)
    return dict(rec)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return format(v, ".6g")
    if v is None:
        return ""
    return str(v)


def _round(v):
    return float(format(v, ".6g")) if isinstance(v, float) else v


def render(records, fmt: str = "csv", metadata: dict | None = None,
           fields: list[str] | None = None) -> str:
    rows = [_as_dict(r) for r in records]
    if not rows:
        raise EmitError("refusing to emit an empty record list")
    fields = fields or list(rows[0])
    metadata = metadata or {}
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# " + json.dumps(metadata, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r.get(f)) for f in fields])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "metadata": metadata,
            "records": [{f: _round(r.get(f)) for f in fields} for r in rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    raise EmitError(f"unknown format {fmt!r}")


def emit(records, fmt: str, path, metadata: dict | None = None,
         fields: list[str] | None = None) -> Path:
    """Write ``records`` to ``path``; I/O failures name the path."""
    text = render(records, fmt, metadata, fields)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as e:
        raise EmitError(f"cannot write {path}: {e}") from e
    return path


def _num(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        return float(s)


def parse(text: str, fmt: str = "csv") -> tuple[dict, list[dict]]:
    """Inverse of :func:`render`: ``(metadata, records)``."""
    if fmt == "json":
        doc = json.loads(text)
        return doc["metadata"], doc["records"]
    lines = text.splitlines()
    meta = json.loads(lines[0][2:]) if lines and lines[0].startswith("# ") else {}
    body = lines[1:] if meta or (lines and lines[0].startswith("#")) else lines
    reader = csv.DictReader(body)
    return meta, [{k: _num(v) for k, v in row.items()} for row in reader]


def load(path, fmt: str | None = None) -> tuple[dict, list[dict]]:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    try:
        text = path.read_text()
    except OSError as e:
        raise EmitError(f"cannot read {path}: {e}") from e
    return parse(text, fmt)
