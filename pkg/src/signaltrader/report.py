"""Run metrics and the comparison tables built from them.

Two table layouts are produced:

* :func:`aggregate` -- one column per stock plus ``Avg``, rows for total
  time, total revenue and train/test accuracy (one table per model and
  strategy).
* :func:`count_table` -- buys, sells and total transactions per model, one
  column per stock, no average.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeError, UsageError

METRIC_ROWS = (
    ("total_time", "total time(s)"),
    ("total_revenue", "total revenue(%)"),
    ("train_accuracy", "train_accuracy"),
    ("test_accuracy", "test_accuracy"),
)

AVG = "Avg."


@dataclass(frozen=True)
class RunMetrics:
    stock_id: str
    model_kind: str
    strategy_kind: str
    total_time: float
    total_revenue: float
    train_accuracy: float
    test_accuracy: float
    buys: int
    sells: int
    total: int

    def __post_init__(self):
        for name in ("train_accuracy", "test_accuracy"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.total_time < 0:
            raise ValueError("total_time must be non-negative")
        if self.total != self.buys + self.sells:
            raise ValueError("total must equal buys + sells")

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.buys, self.sells, self.total

    def to_dict(self, include_time: bool = True) -> dict:
        d = asdict(self)
        if not include_time:
            d.pop("total_time")
        return d

    @classmethod
    def from_dict(cls, d: dict, total_time: float | None = None) -> "RunMetrics":
        d = dict(d)
        if total_time is not None:
            d["total_time"] = total_time
        d.setdefault("total_time", 0.0)
        return cls(**d)


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size < 1:
        raise ShapeError(f"cannot compare label vectors of shapes {y_true.shape} and {y_pred.shape}")
    return float(np.mean(y_true == y_pred))


@dataclass(frozen=True)
class ReportTable:
    """A labelled numeric grid; ``values[r][c]`` is row ``r``, column ``c``."""

    title: str
    columns: tuple[str, ...]
    row_labels: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    integer_rows: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.values) != len(self.row_labels):
            raise ShapeError("one value row per row label")
        for row in self.values:
            if len(row) != len(self.columns):
                raise ShapeError("every row needs one value per column")

    def row(self, label: str) -> tuple[float, ...]:
        return self.values[self.row_labels.index(label)]

    def cell(self, label: str, column: str) -> float:
        return self.row(label)[self.columns.index(column)]

    @classmethod
    def from_json(cls, text: str) -> "ReportTable":
        d = json.loads(text)
        return cls(
            title=d["title"],
            columns=tuple(d["columns"]),
            row_labels=tuple(r["label"] for r in d["rows"]),
            values=tuple(tuple(r["values"]) for r in d["rows"]),
            integer_rows=tuple(d.get("integer_rows", ())),
        )


def aggregate(runs: Sequence[RunMetrics], title: str | None = None) -> ReportTable:
    """Per-stock columns in input order followed by the unweighted mean."""
    if not runs:
        raise UsageError("aggregate needs at least one run")
    columns = tuple(r.stock_id for r in runs) + (AVG,)
    values = []
    for attr, _ in METRIC_ROWS:
        row = [float(getattr(r, attr)) for r in runs]
        values.append(tuple(row) + (math.fsum(row) / len(row),))
    if title is None:
        kinds = sorted({(r.model_kind, r.strategy_kind) for r in runs})
        title = "; ".join(f"{m} / {s}" for m, s in kinds)
    return ReportTable(
        title=title,
        columns=columns,
        row_labels=tuple(label for _, label in METRIC_ROWS),
        values=tuple(values),
    )


def count_table(runs: Sequence[RunMetrics], title: str = "transaction counts") -> ReportTable:
    """Buy/sell/total rows for each model kind, one column per stock."""
    if not runs:
        raise UsageError("count_table needs at least one run")
    stocks = list(dict.fromkeys(r.stock_id for r in runs))
    models = list(dict.fromkeys(r.model_kind for r in runs))
    by_key = {(r.model_kind, r.stock_id): r for r in runs}
    labels, values = [], []
    for m in models:
        for what in ("buys", "sells", "total"):
            labels.append(f"{what} ({m})")
            row = []
            for s in stocks:
                r = by_key.get((m, s))
                row.append(getattr(r, what) if r is not None else float("nan"))
            values.append(tuple(row))
    return ReportTable(
        title=title,
        columns=tuple(stocks),
        row_labels=tuple(labels),
        values=tuple(values),
        integer_rows=tuple(labels),
    )


def _fmt(x, integer: bool) -> str:
    if isinstance(x, float) and math.isnan(x):
        return ""
    if integer:
        return str(int(x))
    return f"{float(x):.6f}"


def _json_num(x, integer: bool):
    if isinstance(x, float) and math.isnan(x):
        return None
    if integer:
        return int(x)
    return round(float(x), 6)


def emit(table: ReportTable | None, fmt: str = "csv") -> str:
    """Render a table as CSV or JSON text; identical tables give identical bytes."""
    if table is None:
        raise UsageError("nothing to emit: build a table with aggregate() first")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["", *table.columns])
        for label, row in zip(table.row_labels, table.values):
            integer = label in table.integer_rows
            w.writerow([label, *(_fmt(v, integer) for v in row)])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "title": table.title,
            "columns": list(table.columns),
            "rows": [
                {
                    "label": label,
                    "values": [_json_num(v, label in table.integer_rows) for v in row],
                }
                for label, row in zip(table.row_labels, table.values)
            ],
        }
        if table.integer_rows:
            doc["integer_rows"] = list(table.integer_rows)
        return json.dumps(doc, indent=2) + "\n"
    raise UsageError(f"unknown report format {fmt!r}")


def write_report(table: ReportTable, path, fmt: str | None = None) -> None:
    from pathlib import Path

    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".") or "csv"
    text = emit(table, fmt)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
