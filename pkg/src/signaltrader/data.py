"""Daily-bar ingestion, cleaning, labelling and dataset construction.

The raw input is a comma-separated export of an exchange daily table.  Only
a handful of its columns feed the models; everything else is carried through
verbatim in :attr:`RawBar.extra_columns`.

Typical flow::

    raw = parse_table(open("600793.csv", encoding="utf-8"))
    bars = clean(raw)
    ds = build_dataset(bars, window=366)
    ds.X_train, ds.y_train
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields, replace
from datetime import date
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import (
    DataError,
    DegenerateFeatureError,
    DomainError,
    EmptyDatasetError,
    InsufficientDataError,
    RowError,
    SchemaError,
)

__all__ = [
    "ColumnMap",
    "DEFAULT_COLUMNS",
    "FEATURE_NAMES",
    "RawBar",
    "Bar",
    "CleaningSummary",
    "StandardizationParams",
    "Dataset",
    "parse_table",
    "read_table",
    "clean",
    "clean_with_summary",
    "change_rate",
    "standardize",
    "build_dataset",
    "bars_to_raw",
    "write_bars",
    "read_bars",
]

_MISSING = {"", "nan", "NaN", "NA", "N/A", "null", "None", "--"}


@dataclass(frozen=True)
class ColumnMap:
    """Header names for the columns the pipeline binds by name."""

    trade_date: str = "trading date"
    prev_close: str = "yesterday's closing price"
    open: str = "today's opening price"
    volume: str = "transaction volume"
    high: str = "highest transaction price"
    low: str = "lowest transaction price"
    latest: str = "latest transaction price"
    amount_rmb: str = "transaction amount in RMB"
    # optional
    security_code: str = "security code"
    amount_original: str = "transaction amount in original currency"

    MANDATORY = (
        "trade_date",
        "prev_close",
        "open",
        "volume",
        "high",
        "low",
        "latest",
        "amount_rmb",
    )
    OPTIONAL = ("security_code", "amount_original")

    def as_dict(self) -> dict[str, str]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_COLUMNS = ColumnMap()

# Order of the per-day attributes used as model inputs.
FEATURE_NAMES = ("prev_close", "open", "high", "low", "latest", "volume", "amount_rmb")

_NUMERIC = ("prev_close", "open", "volume", "high", "low", "latest", "amount_original", "amount_rmb")


@dataclass(frozen=True)
class RawBar:
    """One parsed row.  Numeric fields are ``None`` where the source cell was blank."""

    security_code: str
    trade_date: date
    prev_close: float | None
    open: float | None
    volume: float | None
    high: float | None
    low: float | None
    latest: float | None
    amount_original: float | None
    amount_rmb: float | None
    extra_columns: dict[str, str] = field(default_factory=dict)

    def key(self) -> tuple:
        """Hashable identity over every source field, used for de-duplication."""
        return (
            self.security_code,
            self.trade_date,
            *(getattr(self, n) for n in _NUMERIC),
            tuple(self.extra_columns.items()),
        )

    def has_missing(self) -> bool:
        return any(getattr(self, n) is None for n in _REQUIRED_NUMERIC)


_REQUIRED_NUMERIC = ("prev_close", "open", "volume", "high", "low", "latest", "amount_rmb")


@dataclass(frozen=True)
class Bar:
    trade_date: date
    prev_close: float
    open: float
    high: float
    low: float
    latest: float
    volume: float
    amount_rmb: float
    change_rate: float

    def features(self) -> tuple[float, ...]:
        return tuple(getattr(self, n) for n in FEATURE_NAMES)


def _parse_float(text: str, row: int, name: str) -> float | None:
    text = text.strip()
    if text in _MISSING:
        return None
    try:
        return float(text.replace(",", ""))
    except ValueError:
        raise RowError(row, f"cannot parse {name!r} value {text!r} as a number") from None


def _parse_date(text: str, row: int) -> date:
    text = text.strip()
    try:
        # tolerate a trailing time part, e.g. "2015-01-05 00:00:00"
        return date.fromisoformat(text[:10])
    except ValueError:
        raise RowError(row, f"cannot parse trading date {text!r}") from None


def _data_lines(stream: Iterable[str]) -> Iterable[str]:
    for line in stream:
        if line.startswith("#"):
            continue
        yield line


def parse_table(stream: TextIO | Iterable[str], columns: ColumnMap = DEFAULT_COLUMNS) -> list[RawBar]:
    """Parse a delimited daily-bar table into :class:`RawBar` records.

    Lines starting with ``#`` are ignored (output files written by this
    package carry a provenance comment).  Row numbers in errors are 1-based
    over data rows.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(_data_lines(stream))
    try:
        header = [h.strip().lstrip("﻿") for h in next(reader)]
    except StopIteration:
        raise SchemaError(columns.trade_date, "empty table: no header row") from None

    pos = {name: i for i, name in enumerate(header)}
    mapping = columns.as_dict()
    for attr in ColumnMap.MANDATORY:
        if mapping[attr] not in pos:
            raise SchemaError(mapping[attr])
    bound = {attr: pos[mapping[attr]] for attr in mapping if mapping[attr] in pos}
    bound_idx = set(bound.values())
    extra_idx = [i for i in range(len(header)) if i not in bound_idx]

    out = []
    for row_no, cells in enumerate(reader, start=1):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) < len(header):
            cells = cells + [""] * (len(header) - len(cells))
        values = {}
        for attr in _NUMERIC:
            if attr in bound:
                values[attr] = _parse_float(cells[bound[attr]], row_no, mapping[attr])
            else:
                values[attr] = None
        code = cells[bound["security_code"]].strip() if "security_code" in bound else ""
        out.append(
            RawBar(
                security_code=code,
                trade_date=_parse_date(cells[bound["trade_date"]], row_no),
                extra_columns={header[i]: cells[i] for i in extra_idx},
                **values,
            )
        )
    return out


def read_table(path, columns: ColumnMap = DEFAULT_COLUMNS) -> list[RawBar]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_table(fh, columns)


def change_rate(latest: float, prev_close: float) -> float:
    """Fractional move from the previous close to the latest price."""
    if not prev_close > 0:
        raise DomainError(f"previous close must be positive, got {prev_close!r}")
    return (latest - prev_close) / prev_close


@dataclass
class CleaningSummary:
    """Row counts after each cleaning rule, in application order."""

    input_rows: int = 0
    after_dedup: int = 0
    after_fill: int = 0
    after_volume: int = 0
    after_price_checks: int = 0
    after_date_dedup: int = 0

    @property
    def output_rows(self) -> int:
        return self.after_date_dedup

    def lines(self) -> list[str]:
        return [
            f"input rows:                      {self.input_rows}",
            f"after removing duplicate rows:   {self.after_dedup}",
            f"after forward fill:              {self.after_fill}",
            f"after dropping negative volume:  {self.after_volume}",
            f"after price sanity checks:       {self.after_price_checks}",
            f"after duplicate-date removal:    {self.after_date_dedup}",
        ]


def clean_with_summary(raw: Sequence[RawBar]) -> tuple[list[Bar], CleaningSummary]:
    summary = CleaningSummary(input_rows=len(raw))
    rows = sorted(raw, key=lambda r: r.trade_date)

    seen = set()
    deduped = []
    for r in rows:
        k = r.key()
        if k in seen:
            continue
        seen.add(k)
        deduped.append(r)
    summary.after_dedup = len(deduped)

    filled = []
    prev: RawBar | None = None
    for r in deduped:
        if prev is not None:
            patch = {n: getattr(prev, n) for n in _NUMERIC if getattr(r, n) is None}
            if patch:
                r = replace(r, **patch)
        if r.has_missing():
            # no predecessor to fill from
            continue
        filled.append(r)
        prev = r
    summary.after_fill = len(filled)

    kept = [r for r in filled if r.volume >= 0]
    summary.after_volume = len(kept)

    kept = [r for r in kept if r.prev_close > 0 and r.open > 0 and r.low <= r.high]
    summary.after_price_checks = len(kept)

    bars = []
    last_date = None
    for r in kept:
        if r.trade_date == last_date:
            continue
        last_date = r.trade_date
        bars.append(
            Bar(
                trade_date=r.trade_date,
                prev_close=r.prev_close,
                open=r.open,
                high=r.high,
                low=r.low,
                latest=r.latest,
                volume=r.volume,
                amount_rmb=r.amount_rmb,
                change_rate=change_rate(r.latest, r.prev_close),
            )
        )
    summary.after_date_dedup = len(bars)
    if not bars:
        raise EmptyDatasetError("no rows left after cleaning")
    return bars, summary


def clean(raw: Sequence[RawBar]) -> list[Bar]:
    """Sort, de-duplicate, forward-fill and filter raw rows.

    Rules, in order: exact duplicate rows are dropped; blank numeric cells take
    the previous row's value (leading rows that cannot be filled are
    dropped); rows with negative volume are dropped; rows whose previous close
    or open is not positive, or whose low exceeds the high, are dropped; for a
    repeated trading date only the first row survives.
    """
    return clean_with_summary(raw)[0]


def bars_to_raw(bars: Iterable[Bar], security_code: str = "") -> list[RawBar]:
    return [
        RawBar(
            security_code=security_code,
            trade_date=b.trade_date,
            prev_close=b.prev_close,
            open=b.open,
            volume=b.volume,
            high=b.high,
            low=b.low,
            latest=b.latest,
            amount_original=None,
            amount_rmb=b.amount_rmb,
        )
        for b in bars
    ]


CHANGE_RATE_COLUMN = "change rate"


def write_bars(
    bars: Sequence[Bar],
    stream: TextIO,
    columns: ColumnMap = DEFAULT_COLUMNS,
    comment: str | None = None,
) -> None:
    """Write cleaned bars in a layout :func:`parse_table` reads back."""
    if comment:
        for line in comment.splitlines():
            stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    attrs = ("trade_date", "prev_close", "open", "volume", "high", "low", "latest", "amount_rmb")
    writer.writerow([getattr(columns, a) for a in attrs] + [CHANGE_RATE_COLUMN])
    for b in bars:
        writer.writerow(
            [b.trade_date.isoformat()]
            + [repr(float(getattr(b, a))) for a in attrs[1:]]
            + [repr(b.change_rate)]
        )


def read_bars(path, columns: ColumnMap = DEFAULT_COLUMNS) -> list[Bar]:
    return clean(read_table(path, columns))


@dataclass(frozen=True)
class StandardizationParams:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.std


def _is_degenerate(std: float, mean: float) -> bool:
    return not std > 1e-12 * max(1.0, abs(mean))


def standardize(column) -> tuple[np.ndarray, StandardizationParams]:
    """Z-score a column with its mean and population standard deviation."""
    x = np.asarray(column, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DataError("standardize needs a 1-D column with at least 2 values")
    mean = x.mean()
    std = x.std()
    if _is_degenerate(std, mean):
        raise DegenerateFeatureError("constant column cannot be standardized")
    params = StandardizationParams(mean=np.asarray(mean), std=np.asarray(std))
    return params.apply(x), params


@dataclass(frozen=True, eq=False)
class Dataset:
    """Standardized model inputs for the trailing ``window`` trading days.

    Rows are in chronological order.  ``train_mask`` marks the training rows;
    in chronological mode it is simply ``arange(n) < split_index``.
    """

    features: np.ndarray
    labels: np.ndarray
    raw_change: np.ndarray
    dates: tuple[date, ...]
    window: int
    split_index: int
    train_mask: np.ndarray
    feature_names: tuple[str, ...]
    params: StandardizationParams
    split_mode: str = "chronological"

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def X_train(self) -> np.ndarray:
        return self.features[self.train_mask]

    @property
    def X_test(self) -> np.ndarray:
        return self.features[~self.train_mask]

    @property
    def y_train(self) -> np.ndarray:
        return self.labels[self.train_mask]

    @property
    def y_test(self) -> np.ndarray:
        return self.labels[~self.train_mask]

    @property
    def change_train(self) -> np.ndarray:
        return self.raw_change[self.train_mask]

    @property
    def change_test(self) -> np.ndarray:
        return self.raw_change[~self.train_mask]


SPLIT_MODES = ("chronological", "shuffled")


def min_bars_for(window: int) -> int:
    return window + 11


def build_dataset(
    bars: Sequence[Bar],
    window: int,
    split_fraction: float = 0.8,
    split_mode: str = "chronological",
    seed: int = 0,
) -> Dataset:
    """Build the labelled, standardized dataset over the last ``window`` days.

    Row ``i`` holds day ``i``'s attributes (``FEATURE_NAMES``); its label is 1
    when that day's change rate is positive.  Standardization parameters are
    fitted on the training rows only.  Features that are constant over the
    training rows are dropped.

    ``split_mode="shuffled"`` draws the training rows at random with ``seed``
    but keeps the rows themselves in date order.
    """
    if int(window) != window or window < 1:
        raise DataError(f"window must be a positive integer, got {window!r}")
    window = int(window)
    if not 0.0 < split_fraction < 1.0:
        raise DataError(f"split_fraction must lie in (0, 1), got {split_fraction!r}")
    if split_mode not in SPLIT_MODES:
        raise DataError(f"unknown split mode {split_mode!r}")
    required = min_bars_for(window)
    if len(bars) < required:
        raise InsufficientDataError(required, len(bars))

    tail = list(bars[-window:])
    n = len(tail)
    n_train = math.floor(split_fraction * n + 1e-9)
    if not 0 < n_train < n:
        raise DataError(f"split of {n} rows at {split_fraction} leaves an empty side")

    raw = np.array([b.features() for b in tail], dtype=float)
    change = np.array([b.change_rate for b in tail], dtype=float)
    labels = (change > 0).astype(np.int64)

    if split_mode == "chronological":
        train_mask = np.arange(n) < n_train
    else:
        rng = np.random.default_rng(seed)
        train_mask = np.zeros(n, dtype=bool)
        train_mask[rng.permutation(n)[:n_train]] = True

    keep, means, stds = [], [], []
    for j, name in enumerate(FEATURE_NAMES):
        try:
            _, p = standardize(raw[train_mask, j])
        except DegenerateFeatureError:
            continue
        keep.append(j)
        means.append(float(p.mean))
        stds.append(float(p.std))
    if not keep:
        raise DegenerateFeatureError("every feature is constant over the training rows")

    params = StandardizationParams(mean=np.array(means), std=np.array(stds))
    features = params.apply(raw[:, keep])
    for arr in (features, labels, change, train_mask):
        arr.setflags(write=False)
    return Dataset(
        features=features,
        labels=labels,
        raw_change=change,
        dates=tuple(b.trade_date for b in tail),
        window=window,
        split_index=n_train,
        train_mask=train_mask,
        feature_names=tuple(FEATURE_NAMES[j] for j in keep),
        params=params,
        split_mode=split_mode,
    )
