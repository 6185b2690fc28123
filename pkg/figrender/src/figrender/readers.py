"""Strict readers for the driftlock output formats.

Each reader checks the documented header before touching the data and
raises SchemaError naming the offending column on any mismatch, so a file
from the wrong scenario (or a drifted schema) cannot be plotted by
accident.  JSON summaries come back as plain dicts with the writer's
"inf"/"-inf"/"nan" strings turned back into floats.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """An input file does not match the documented driftlock schema."""


# exact headers of the single-purpose CSV files
CYCLES_HEADER = ["cycle", "start_time_s", "f_est_hz", "correction_hz", "true_detuning_hz"]
PSD_HEADER = ["freq_hz", "psd_hz2_per_hz"]
PSD_FIT_HEADER = ["amplitude_hz2_per_hz", "exponent", "f_lo_hz", "f_hi_hz", "residual_rms_log10"]
DIFFUSION_HEADER = ["interval_s", "variance_hz2"]
DIFFUSION_FIT_HEADER = ["alpha", "d_alpha_hz2_per_s_alpha"]
VIOLATIONS_HEADER = ["circuit_id", "germ", "L", "k", "two_delta_loglik", "flag"]

FLAGS = ("consistent", "fluctuation", "violation")


@dataclass
class Matrix:
    """One map-style CSV: column coordinates, row coordinates, value grid."""

    corner: str
    col_values: np.ndarray
    row_values: np.ndarray
    values: np.ndarray


@dataclass
class ViolationRow:
    circuit_id: str
    germ: str
    max_length: int
    k: int
    statistic: float
    flag: str


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file does not exist")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    return rows[0], rows[1:]


def _float_cell(path, column: str, text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise SchemaError(f"{path}: column {column!r}: not a number: {text!r}") from exc


def read_table(path, expected_header: list[str]) -> dict[str, np.ndarray]:
    """All-numeric CSV whose header must equal *expected_header* exactly."""
    header, rows = _read_rows(path)
    if header != expected_header:
        unexpected = [(h or "<empty>") for h in header if h not in expected_header]
        missing = [h for h in expected_header if h not in header]
        bad = ", ".join(missing + unexpected) or "column order"
        raise SchemaError(
            f"{path}: header mismatch on {bad}: expected {expected_header}, got {header}"
        )
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    columns: dict[str, list[float]] = {name: [] for name in header}
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row with {len(row)} cells does not match the header")
        for name, cell in zip(header, row):
            columns[name].append(_float_cell(path, name, cell))
    return {name: np.asarray(vals) for name, vals in columns.items()}


def read_matrix(path, corner: str) -> Matrix:
    """Map-style CSV whose corner label must be *corner*."""
    header, rows = _read_rows(path)
    if not header or header[0] != corner:
        got = header[0] if header else "<empty>"
        raise SchemaError(f"{path}: corner column {got!r}: expected {corner!r}")
    if len(header) < 2:
        raise SchemaError(f"{path}: no value columns after {corner!r}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    col_values = np.array([_float_cell(path, "header", cell) for cell in header[1:]])
    row_values = []
    values = []
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row with {len(row)} cells does not match the header")
        row_values.append(_float_cell(path, corner, row[0]))
        values.append([_float_cell(path, "values", cell) for cell in row[1:]])
    return Matrix(
        corner=corner,
        col_values=col_values,
        row_values=np.array(row_values),
        values=np.array(values),
    )


def read_violations(path) -> list[ViolationRow]:
    header, rows = _read_rows(path)
    if header != VIOLATIONS_HEADER:
        raise SchemaError(f"{path}: header mismatch: expected {VIOLATIONS_HEADER}, got {header}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out = []
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row with {len(row)} cells does not match the header")
        cid, germ, length, k, stat, flag = row
        if flag not in FLAGS:
            raise SchemaError(f"{path}: column 'flag': unknown value {flag!r}")
        out.append(
            ViolationRow(
                circuit_id=cid,
                germ=germ,
                max_length=int(_float_cell(path, "L", length)),
                k=int(_float_cell(path, "k", k)),
                statistic=_float_cell(path, "two_delta_loglik", stat),
                flag=flag,
            )
        )
    return out


def _revive(obj):
    if isinstance(obj, dict):
        return {k: _revive(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_revive(v) for v in obj]
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file does not exist")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    return _revive(doc)


def summary_number(summary: dict, dotted_key: str, path="summary.json") -> float:
    """Fetch a numeric leaf like "closed.std_f_est_hz" from a summary dict."""
    node = summary
    for part in dotted_key.split("."):
        if not isinstance(node, dict) or part not in node:
            raise SchemaError(f"{path}: key {dotted_key!r} not found")
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise SchemaError(f"{path}: key {dotted_key!r} is not a number")
    return float(node)
