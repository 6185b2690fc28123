"""Deterministic CSV and JSON emission.

All writers format floats with repr (shortest round-trip form), fix the
line separator and sort JSON keys, so identical data always produces
identical bytes; non-finite floats become the strings "inf", "-inf",
"nan" in JSON, which keeps files strictly parseable.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    """Render one CSV cell; numpy scalars coerce to builtin types first."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header: list[str], rows) -> None:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n")


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    return obj


def write_json(path, obj) -> None:
    path = Path(path)
    path.write_text(json.dumps(_sanitize(obj), sort_keys=True, indent=2) + "\n")


def write_matrix_csv(path, corner: str, col_values, row_values, matrix) -> None:
    """Matrix with axis headers: first row holds column coordinates, the
    first cell of each following row its row coordinate."""
    header = [corner] + [fmt(float(c)) for c in col_values]
    rows = ([float(r), *row] for r, row in zip(row_values, matrix))
    write_csv(path, header, rows)
