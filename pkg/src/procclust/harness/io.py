"""Plain-text series loading and CSV emission."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from ..spectra import Observation
from .config import DataError

FORMATS = ("one-column-text", "csv-column")


def _parse_float(token: str, path, lineno: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise DataError(f"{path}: line {lineno}: cannot parse {token.strip()!r} as a number") from None
    if not math.isfinite(v):
        raise DataError(f"{path}: line {lineno}: non-finite value {token.strip()!r}")
    return v


def load_series(path, fmt: str = "one-column-text", column=0, center: bool = False) -> Observation:
    """Read one scalar series from a text file.

    ``one-column-text`` takes one number per line (blank lines and ``#``
    comments skipped). ``csv-column`` takes ``column`` (index or header
    name) of a comma-separated file; a non-numeric first row is a header.
    """
    path = Path(path)
    if fmt not in FORMATS:
        raise DataError(f"unknown series format {fmt!r}; expected one of {FORMATS}")
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    values = []
    if fmt == "one-column-text":
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                values.append(_parse_float(line, path, lineno))
    else:
        rows = list(csv.reader(io.StringIO(text)))
        idx = column
        start = 0
        if rows and isinstance(column, str):
            if column not in rows[0]:
                raise DataError(f"{path}: no column named {column!r}")
            idx, start = rows[0].index(column), 1
        elif rows:
            try:
                float(rows[0][idx])
            except (ValueError, IndexError):
                start = 1
        for lineno, row in enumerate(rows[start:], start + 1):
            if not row or not "".join(row).strip():
                continue
            if idx >= len(row):
                raise DataError(f"{path}: line {lineno}: missing column {idx}")
            values.append(_parse_float(row[idx], path, lineno))
    if len(values) < 2:
        raise DataError(f"{path}: need at least 2 values, found {len(values)}")
    x = np.array(values)
    if center:
        x = x - x.mean()
    return Observation(x)


def save_series(obs: Observation, path) -> None:
    """Write samples one per line with round-trip precision."""
    Path(path).write_text("".join(f"{v!r}\n" for v in obs.samples.tolist()))


def load_labels(path) -> list[int]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read labels {path}: {exc}") from None
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(int(line))
        except ValueError:
            raise DataError(f"{path}: line {lineno}: label {line!r} is not an integer") from None
    return out


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def write_csv(rows: list[dict], header: list[str], comments=(), out=None) -> str:
    """Render ``rows`` as CSV with leading ``#`` comment lines; write to ``out`` if given."""
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(row.get(h, "")) for h in header])
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text
