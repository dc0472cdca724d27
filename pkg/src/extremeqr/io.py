"""CSV/JSON ingestion and report emission.

Dialect: comma separated, header row required, '.' decimal, UTF-8. Missing
or flagged values are written as empty cells next to a ``status`` column.
Every emitted CSV starts with a ``# config: {...}`` comment line holding the
effective run configuration as JSON. Floats are written with ``repr`` so a
re-parse gives back the exact in-memory values.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from typing import Iterable, Sequence

import numpy as np

from .conditional import Sample
from .errors import DataError

__all__ = [
    "read_dataset",
    "format_value",
    "parse_value",
    "write_rows",
    "read_rows",
    "write_json",
    "open_output",
]

CONFIG_PREFIX = "# config: "


def read_dataset(path: str) -> Sample:
    """Load a CSV with a ``y`` column and covariate columns ``x`` or
    ``x1, ..., xp`` (any other columns are ignored)."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(row for row in fh if not row.lstrip().startswith("#"))
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        if "y" not in header:
            raise DataError(f"{path}: missing required column 'y'")
        if "x" in header:
            xcols = [header.index("x")]
        else:
            names = sorted((h for h in header if h[:1] == "x" and h[1:].isdigit()),
                           key=lambda h: int(h[1:]))
            if not names:
                raise DataError(f"{path}: missing covariate column 'x' or 'x1'")
            xcols = [header.index(h) for h in names]
        ycol = header.index("y")
        xs, ys = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}, line {line_no}: expected {len(header)} fields, "
                                f"got {len(row)}")
            try:
                xs.append([float(row[c]) for c in xcols])
                ys.append(float(row[ycol]))
            except ValueError:
                raise DataError(f"{path}, line {line_no}: non-numeric value") from None
            if not (all(math.isfinite(v) for v in xs[-1]) and math.isfinite(ys[-1])):
                raise DataError(f"{path}, line {line_no}: non-finite value")
    if not ys:
        raise DataError(f"{path}: no data rows")
    return Sample(np.array(xs), np.array(ys))


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if not math.isfinite(v) else repr(float(v))
    return str(v)


def parse_value(text: str):
    """Inverse of :func:`format_value` for numbers; other text is returned as is."""
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def config_line(config: dict) -> str:
    return CONFIG_PREFIX + json.dumps(config, sort_keys=True, default=_json_default)


def write_rows(stream, columns: Sequence[str], rows: Iterable[dict], config: dict | None = None):
    """Write ``rows`` (dicts keyed by ``columns``) as CSV to an open text stream."""
    if config is not None:
        stream.write(config_line(config) + "\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(row.get(c)) for c in columns])


def read_rows(stream):
    """Parse a CSV written by :func:`write_rows`: returns ``(config, columns, rows)``."""
    text = stream.read() if hasattr(stream, "read") else str(stream)
    lines = text.splitlines()
    config = None
    body = []
    for line in lines:
        if line.startswith(CONFIG_PREFIX) and config is None and not body:
            config = json.loads(line[len(CONFIG_PREFIX):])
        elif line.startswith("#"):
            continue
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [{c: parse_value(v) for c, v in zip(columns, r)} for r in reader]
    return config, columns, rows


def write_json(stream, payload: dict):
    json.dump(payload, stream, sort_keys=True, indent=2, default=_json_default,
              allow_nan=False)
    stream.write("\n")


def clean_json(value):
    """Replace non-finite floats with None so the JSON stays standard."""
    if isinstance(value, dict):
        return {k: clean_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean_json(v) for v in value]
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return None
    return value


@contextmanager
def open_output(path: str | None):
    """Yield a text stream for ``path``; '-' or None means stdout."""
    if path in (None, "-"):
        yield sys.stdout
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        yield fh


def rows_to_text(columns, rows, config=None) -> str:
    buf = io.StringIO()
    write_rows(buf, columns, rows, config)
    return buf.getvalue()
