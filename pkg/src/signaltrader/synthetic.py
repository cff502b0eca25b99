"""Deterministic synthetic daily tables used as bundled sample data.

Each stock is a geometric random walk on business days with its own drift
and volatility.  A few rows are deliberately dirtied (an exact duplicate, a
blank cell, a negative volume) so the cleaning rules have something to do.

The bundled CSVs under ``signaltrader/datasets`` are produced by
:func:`write_bundle` with the defaults below; regenerating them must give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
from datetime import date, timedelta
from importlib import resources
from pathlib import Path

import numpy as np

from .data import DEFAULT_COLUMNS, ColumnMap

N_STOCKS = 10
N_DAYS = 800
START = date(2020, 1, 2)
BUNDLE_SEED = 20240101
MONOTONE_DAYS = 400

_ORDER = ("security_code", "trade_date", "prev_close", "open", "volume", "high", "low", "latest", "amount_rmb")


def business_days(start: date, n: int) -> list[date]:
    out, d = [], start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return out


def _rows_from_path(code, days, opens, closes, rng) -> list[dict]:
    rows = []
    prev = closes[0] / (1.0 + rng.normal(0.0, 0.01))
    for d, o, c in zip(days, opens, closes):
        hi = max(o, c) * (1.0 + abs(rng.normal(0.0, 0.006)))
        lo = min(o, c) * (1.0 - abs(rng.normal(0.0, 0.006)))
        vol = float(np.round(rng.lognormal(13.0, 0.4)))
        rows.append(
            {
                "security_code": code,
                "trade_date": d.isoformat(),
                "prev_close": f"{prev:.2f}",
                "open": f"{o:.2f}",
                "volume": f"{vol:.0f}",
                "high": f"{hi:.2f}",
                "low": f"{lo:.2f}",
                "latest": f"{c:.2f}",
                "amount_rmb": f"{vol * 0.5 * (o + c):.2f}",
            }
        )
        prev = float(f"{c:.2f}")
    return rows


def generate_stock(code: str, seed: int, n_days: int = N_DAYS, start: date = START, dirty: bool = True) -> list[dict]:
    """Rows for one stock as ``{field: text}`` dicts, in date order."""
    rng = np.random.default_rng(seed)
    days = business_days(start, n_days)
    drift = rng.uniform(-0.0004, 0.0012)
    vol = rng.uniform(0.012, 0.03)
    close = rng.uniform(5.0, 60.0) * np.exp(np.cumsum(rng.normal(drift, vol, n_days)))
    gap = rng.normal(0.0, vol / 3.0, n_days)
    opens = np.empty(n_days)
    opens[0] = close[0] * (1.0 + gap[0])
    opens[1:] = close[:-1] * (1.0 + gap[1:])
    rows = _rows_from_path(code, days, opens, close, rng)
    if dirty:
        picks = rng.choice(np.arange(5, n_days - 5), size=4, replace=False)
        rows[picks[0]]["high"] = ""
        rows[picks[1]]["volume"] = "-" + rows[picks[1]]["volume"]
        rows.insert(picks[2] + 1, dict(rows[picks[2]]))
        rows.insert(picks[3] + 1, dict(rows[picks[3]]))
    return rows


def generate_monotone(n_days: int = MONOTONE_DAYS, start: date = START) -> list[dict]:
    """Steadily rising opens; closes alternate above and below trend.

    Opens increase every day, while the day-over-day change of the close
    alternates in sign, so both label classes are present.
    """
    rng = np.random.default_rng(7)
    days = business_days(start, n_days)
    base = 10.0 * 1.004 ** np.arange(n_days)
    wiggle = np.where(np.arange(n_days) % 2 == 0, 1.0, -1.0) * 0.012
    closes = base * (1.0 + wiggle)
    opens = base * 0.999
    return _rows_from_path("MONO01", days, opens, closes, rng)


def rows_to_csv(rows: list[dict], columns: ColumnMap = DEFAULT_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([getattr(columns, k) for k in _ORDER])
    for r in rows:
        w.writerow([r[k] for k in _ORDER])
    return buf.getvalue()


def stock_codes(n: int = N_STOCKS) -> list[str]:
    return [f"SYN{k:02d}" for k in range(1, n + 1)]


def bundle_texts(seed: int = BUNDLE_SEED) -> dict[str, str]:
    """File name -> CSV text for every bundled table."""
    out = {}
    for k, code in enumerate(stock_codes()):
        out[f"{code}.csv"] = rows_to_csv(generate_stock(code, seed + k))
    out["monotone.csv"] = rows_to_csv(generate_monotone())
    return out


def write_bundle(directory, seed: int = BUNDLE_SEED) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in bundle_texts(seed).items():
        p = directory / name
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths


def bundled_dir() -> Path:
    return Path(str(resources.files("signaltrader") / "datasets"))


def bundled_stock_paths() -> list[Path]:
    """The ten synthetic stock tables, in code order."""
    d = bundled_dir()
    return [d / f"{code}.csv" for code in stock_codes()]


def monotone_path() -> Path:
    return bundled_dir() / "monotone.csv"
