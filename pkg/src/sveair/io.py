"""Deterministic CSV emission.

Floats are written with repr(), the shortest decimal that round-trips to
the same float64, so identical runs produce byte-identical files and
re-parsing reproduces the in-memory values exactly. LF line endings.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from sveair.errors import SveairError


def format_value(x) -> str:
    """Shortest round-trip decimal for a float (ints stay integral)."""
    value = float(x)
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def write_csv(path, header, columns) -> None:
    """Write columns of equal length under a comma-separated header."""
    columns = [np.asarray(col) for col in columns]
    if len(columns) != len(header):
        raise SveairError(f"{len(header)} header fields but {len(columns)} columns")
    length = columns[0].shape[0]
    if any(col.shape != (length,) for col in columns):
        raise SveairError("CSV columns must share one length")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in range(length):
            handle.write(",".join(format_value(col[row]) for col in columns) + "\n")


def read_csv(path):
    """Read back a numeric CSV written by write_csv.

    Returns:
        (header, columns) with one float64 array per column.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise SveairError(f"{path}: empty CSV")
    header = rows[0]
    data = np.array([[float(cell) for cell in row] for row in rows[1:]], dtype=np.float64)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return header, [data[:, j] for j in range(len(header))]
