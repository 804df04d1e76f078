"""Matrix CSV files: one header row, then numeric rows written with 17
significant digits so binary64 values survive a round trip."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class ParseError(ValueError):
    pass


def default_header(p, prefix="V"):
    return [f"{prefix}{j + 1}" for j in range(p)]


def format_value(x) -> str:
    return format(float(x), ".17g")


def write_matrix_csv(path, M, header=None):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    header = list(header) if header is not None else default_header(M.shape[1])
    if len(header) != M.shape[1]:
        raise ValueError(f"header has {len(header)} names for {M.shape[1]} columns")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in M:
            w.writerow([format_value(x) for x in row])


def write_rows_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in rows:
            w.writerow([format_value(x) if isinstance(x, (float, np.floating)) else x for x in row])


def read_matrix_csv(path, return_header=False):
    """Parse a matrix file; errors name the offending line (1-based)."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    header = [h.strip() for h in rows[0]]
    width = len(header)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise ParseError(f"{path}: line {lineno} has {len(row)} fields, expected {width}")
        try:
            data.append([float(c) for c in row])
        except ValueError:
            bad = next(c for c in row if not _is_float(c))
            raise ParseError(f"{path}: line {lineno} has non-numeric cell {bad!r}") from None
    if not data:
        raise ParseError(f"{path}: no data rows")
    M = np.array(data, dtype=float)
    return (M, header) if return_header else M


def _is_float(c):
    try:
        float(c)
        return True
    except ValueError:
        return False
