"""Trace CSV and check-report JSON files."""

import csv
import json
import os
from typing import Any, Dict, List, Optional, Sequence, TextIO

from .scheme import TraceRecord
from .spaces import Point

REPORT_SCHEMA_VERSION = 1


def format_float(value: Optional[float]) -> str:
    """17 significant digits; empty for a missing value."""
    return "" if value is None else format(value, ".17g")


def trace_header(dim: int, p: int) -> List[str]:
    """Column names for a trace of a p-operator scheme in R^dim."""
    header = ["n"] + [f"x_{k}" for k in range(dim)]
    for i in range(1, p):
        header += [f"y{i}_{k}" for k in range(dim)]
    header += ["residual", "pair_gap", "d_n"]
    return header + [f"xnext_{k}" for k in range(dim)]


def trace_row(record: TraceRecord) -> List[str]:
    """One CSV row, in trace_header order."""
    row = [str(record.n)] + [format_float(v) for v in record.x_n.coords]
    for y in record.y_n:
        row += [format_float(v) for v in y.coords]
    row += [format_float(record.residual), format_float(record.pair_gap), format_float(record.d_n)]
    return row + [format_float(v) for v in record.x_next.coords]


def write_trace(stream: TextIO, trace: Sequence[TraceRecord], dim: int, p: int) -> None:
    """Write the header and one row per record."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(trace_header(dim, p))
    for record in trace:
        writer.writerow(trace_row(record))


def save_trace(path: str, trace: Sequence[TraceRecord], dim: int, p: int) -> str:
    """Write a trace CSV, creating parent directories."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_trace(f, trace, dim, p)
    return path


def read_trace(stream: TextIO) -> List[Dict[str, Any]]:
    """Parse a trace CSV back into n, x, ys, residual, pair_gap, d_n and x_next."""
    reader = csv.reader(stream)
    header = next(reader)
    dim = sum(1 for name in header if name.startswith("x_"))
    stages = (len(header) - 4 - 2 * dim) // dim
    tail = 1 + dim * (stages + 1)
    rows = []
    for raw in reader:
        values = raw[1:]
        x = Point([float(v) for v in values[:dim]])
        ys = [
            Point([float(v) for v in values[dim * (i + 1): dim * (i + 2)]])
            for i in range(stages)
        ]
        residual, pair_gap, d_n = raw[tail: tail + 3]
        rows.append({
            "n": int(raw[0]),
            "x": x,
            "ys": ys,
            "residual": float(residual) if residual else None,
            "pair_gap": float(pair_gap),
            "d_n": float(d_n),
            "x_next": Point([float(v) for v in raw[tail + 3:]]),
        })
    return rows


def write_report(path: str, document: Dict[str, Any]) -> str:
    """Write a JSON report, creating parent directories."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_report(document))
    return path


def dumps_report(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"
