"""Reading observations and writing plot-ready records."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np

__all__ = ["DataError", "read_observations", "format_number", "write_records"]


class DataError(ValueError):
    """Unreadable or empty observation file."""


def read_observations(path, column: str | None = None) -> np.ndarray:
    """Parse one observation per line, or the named column of a CSV file.

    Blank lines are skipped; anything else that is not a decimal number is
    an error that names the offending line.
    """
    text = Path(path).read_text()
    values = []
    if column is None:
        for lineno, line in enumerate(text.splitlines(), start=1):
            item = line.strip()
            if not item:
                continue
            try:
                values.append(float(item))
            except ValueError:
                raise DataError(f"{path}:{lineno}: not a number: {item!r}") from None
    else:
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: no observations")
        header = [h.strip() for h in header]
        if column not in header:
            raise DataError(f"{path}:1: no column named {column!r} (have {header})")
        idx = header.index(column)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                values.append(float(row[idx]))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: bad value in column {column!r}") from None
    if not values:
        raise DataError(f"{path}: no observations")
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{path}: non-finite observation")
    return arr


def format_number(value, paper: bool = False) -> str:
    """Shortest round-trip decimal, or three significant figures with ``paper``."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return f"{v:.3g}" if paper else repr(v)


def _jsonable(value, paper: bool):
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return None
        return float(f"{v:.3g}") if paper else v
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _jsonable(v, paper) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v, paper) for v in value]
    return value


def write_records(records: list[dict], fmt: str, out=None, *, metadata: dict | None = None,
                  paper: bool = False, columns: Iterable[str] | None = None) -> str:
    """Serialise records as JSON or CSV; returns the text and writes it to ``out`` if given."""
    if fmt == "json":
        payload = {"metadata": metadata, "records": records} if metadata is not None else records
        text = json.dumps(_jsonable(payload, paper), indent=2) + "\n"
    elif fmt == "csv":
        cols = list(columns) if columns is not None else (list(records[0]) if records else [])
        buf = io.StringIO()
        if metadata:
            for k, v in metadata.items():
                buf.write(f"# {k}={format_number(v, paper) if not isinstance(v, (list, dict)) else json.dumps(v)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for rec in records:
            writer.writerow([format_number(rec.get(c), paper) for c in cols])
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out is not None:
        Path(out).write_text(text)
    return text
