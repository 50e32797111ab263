"""File formats: point and data CSVs, complex/graph JSON, trace JSONL, tally CSV."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from nervegraph.graphs import factorization_string

POINT_HEADERS = {2: ["x", "y"], 3: ["x", "y", "z"]}


class FormatError(ValueError):
    """Unreadable or misshaped input file."""


def read_points(path) -> np.ndarray:
    """Vertices from a CSV with header ``x,y`` or ``x,y,z``; row order gives labels."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path} is empty")
    header = [h.strip().lower() for h in rows[0]]
    if header not in POINT_HEADERS.values():
        raise FormatError(f"{path}: header must be x,y or x,y,z, got {rows[0]}")
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if not body:
        raise FormatError(f"{path} has no points")
    try:
        P = np.array([[float(c) for c in r] for r in body])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry ({exc})") from exc
    if P.ndim != 2 or P.shape[1] != len(header):
        raise FormatError(f"{path}: every row needs {len(header)} coordinates")
    if not np.all(np.isfinite(P)):
        raise FormatError(f"{path}: non-finite coordinates")
    return P


def write_points(path, P) -> None:
    P = np.asarray(P, dtype=float)
    write_matrix(path, P, POINT_HEADERS[P.shape[1]])


def read_matrix(path) -> tuple:
    """Numeric CSV with a header row; returns ``(array, header)``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path} is empty")
    header = rows[0]
    body = [r for r in rows[1:] if r]
    try:
        X = np.array([[float(c) for c in r] for r in body], dtype=float).reshape(len(body), len(header))
    except ValueError as exc:
        raise FormatError(f"{path}: bad numeric table ({exc})") from exc
    return X, header


def write_matrix(path, X, header) -> None:
    X = np.asarray(X, dtype=float).reshape(-1, len(header))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in X:
            w.writerow([repr(float(v)) for v in row])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read JSON {path}: {exc}") from exc


def tally_rows(tally) -> list:
    return [(factorization_string(s), f) for s, f in tally]


def write_tally(path, tally) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "structure", "frequency"])
        for i, (s, f) in enumerate(tally_rows(tally), 1):
            w.writerow([i, s, f"{f:.6f}"])


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
