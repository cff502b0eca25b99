"""Replaying binary signals through the two trading rules.

Both rules trade at the day's open and book a profit only on a sell:

    profit = (open * buy_count - buy_price) / buy_price

where ``buy_price`` is the accumulated cost of the ``buy_count`` lots held.

``run_simple`` follows the signal every day.  Note that a signal-1 day
*always* buys, even with a position already open, and this resets the cost
basis to that day's open with a single lot.  That is deliberate: it is how
the rule is defined, and it is why simple replays log many more buys than
sells.

``run_threshold`` gates both sides: an open position is topped up only when
its running gain exceeds ``buy_threshold``, and closed on a 0 signal only
when the running gain is below ``sell_threshold``.
"""

from __future__ import annotations

import csv
import io
import json
import itertools
import math
from dataclasses import dataclass, field, replace
from datetime import date
from typing import Sequence

import numpy as np

from .errors import ConfigError, ShapeError

BUY, SELL, HOLD = "buy", "sell", "hold"

# Placeholders: no reference values exist for these gates.
DEFAULT_BUY_THRESHOLD = 0.02
DEFAULT_SELL_THRESHOLD = 0.05


@dataclass(frozen=True)
class SignalSeries:
    dates: tuple[date, ...]
    signals: tuple[int, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.signals):
            raise ShapeError(f"{len(self.dates)} dates but {len(self.signals)} signals")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ShapeError("signal dates must be strictly increasing")
        if any(s not in (0, 1) for s in self.signals):
            raise ValueError("signals must be 0 or 1")

    def __len__(self) -> int:
        return len(self.signals)

    @classmethod
    def from_arrays(cls, dates, signals) -> "SignalSeries":
        return cls(tuple(dates), tuple(int(s) for s in signals))


def align_signals(dates: Sequence[date], predictions, window: int) -> SignalSeries:
    """Attach predictions for the trailing ``window`` days to their dates.

    ``predictions[k]`` belongs to ``dates[len(dates) - window + k]``; put the
    other way round, the signal for bar ``i`` of the full history is
    ``predictions[i - len(dates) + window]``.
    """
    predictions = np.asarray(predictions).ravel()
    if predictions.size != window or window > len(dates):
        raise ShapeError(f"need {window} predictions for the last {window} of {len(dates)} dates")
    return SignalSeries.from_arrays(tuple(dates[len(dates) - window :]), predictions)


@dataclass
class PositionState:
    buy_price: float | None = None
    buy_count: int = 0
    buy_index: int | None = None

    def gain(self, price: float) -> float:
        return (price * self.buy_count - self.buy_price) / self.buy_price

    def clear(self) -> None:
        self.buy_price = None
        self.buy_count = 0
        self.buy_index = None


@dataclass(frozen=True)
class ThresholdConfig:
    buy_threshold: float = DEFAULT_BUY_THRESHOLD
    sell_threshold: float = DEFAULT_SELL_THRESHOLD
    # accepted for completeness; no rule reads it
    shorts: int | None = None

    def __post_init__(self):
        for name in ("buy_threshold", "sell_threshold"):
            v = getattr(self, name)
            if math.isnan(v):
                raise ConfigError(f"{name} must be a number")


@dataclass(frozen=True)
class TradeLog:
    actions: tuple[str, ...]
    profits: tuple[float, ...]
    dates: tuple[date, ...] = ()
    fee_per_transaction: float = 0.0
    notional_per_trade: float | None = None
    net_revenue: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if len(self.actions) != len(self.profits):
            raise ShapeError("actions and profits must have equal length")
        if self.dates and len(self.dates) != len(self.actions):
            raise ShapeError("dates must match the replayed days")
        if self.net_revenue is None:
            object.__setattr__(self, "net_revenue", self.gross_revenue)

    @property
    def buys(self) -> int:
        return sum(1 for a in self.actions if a == BUY)

    @property
    def sells(self) -> int:
        return sum(1 for a in self.actions if a == SELL)

    @property
    def total(self) -> int:
        return self.buys + self.sells

    @property
    def gross_revenue(self) -> float:
        """Sum of booked profits, in percent."""
        return 100.0 * math.fsum(self.profits)

    def cumulative_returns(self) -> list[float]:
        return [100.0 * c for c in itertools.accumulate(self.profits)]

    def to_csv(self, comment: str | None = None) -> str:
        """Per-day plot data: date, action, profit, cumulative_return (percent)."""
        buf = io.StringIO()
        if comment:
            for line in comment.splitlines():
                buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["date", "action", "profit", "cumulative_return"])
        dates = self.dates or tuple(range(len(self.actions)))
        for d, a, p, c in zip(dates, self.actions, self.profits, self.cumulative_returns()):
            w.writerow([d.isoformat() if isinstance(d, date) else d, a, repr(float(p)), repr(c)])
        return buf.getvalue()

    def summary(self) -> dict:
        buys, sells, total = count_transactions(self)
        return {
            "buys": buys,
            "sells": sells,
            "total": total,
            "gross_revenue_percent": self.gross_revenue,
            "net_revenue_percent": self.net_revenue,
            "fee_per_transaction": self.fee_per_transaction,
            "notional_per_trade": self.notional_per_trade,
            "days": len(self.actions),
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def _opens_and_dates(signals, bars):
    if isinstance(signals, SignalSeries):
        sig = signals.signals
        sig_dates = signals.dates
    else:
        sig = tuple(int(s) for s in signals)
        sig_dates = None
    bars = list(bars)
    if bars and hasattr(bars[0], "open"):
        opens = [float(b.open) for b in bars]
        bar_dates = tuple(b.trade_date for b in bars)
        if sig_dates is not None and sig_dates != bar_dates:
            raise ShapeError("signal dates do not line up with the bars")
    else:
        opens = [float(b) for b in bars]
        bar_dates = None
    if len(sig) != len(opens):
        raise ShapeError(f"{len(sig)} signals for {len(opens)} bars")
    return sig, opens, bar_dates or sig_dates or ()


def run_simple(signals, bars) -> TradeLog:
    """Follow every signal: buy on 1, sell an open position on 0.

    ``signals`` is a :class:`SignalSeries` or a plain 0/1 sequence; ``bars``
    are :class:`~signaltrader.data.Bar` records or bare open prices.
    """
    sig, opens, dates = _opens_and_dates(signals, bars)
    pos = PositionState()
    actions, profits = [], []
    for i, (s, price) in enumerate(zip(sig, opens)):
        if s == 1:
            pos.buy_price, pos.buy_count, pos.buy_index = price, 1, i
            actions.append(BUY)
            profits.append(0.0)
        elif pos.buy_price is not None:
            profits.append(pos.gain(price))
            actions.append(SELL)
            pos.clear()
        else:
            actions.append(HOLD)
            profits.append(0.0)
    return TradeLog(actions=tuple(actions), profits=tuple(profits), dates=tuple(dates))


def run_threshold(signals, bars, th: ThresholdConfig = ThresholdConfig()) -> TradeLog:
    """Gated rule: add a lot only above ``buy_threshold``, exit only below ``sell_threshold``."""
    sig, opens, dates = _opens_and_dates(signals, bars)
    pos = PositionState()
    actions, profits = [], []
    for i, (s, price) in enumerate(zip(sig, opens)):
        if s == 1:
            if pos.buy_price is None:
                pos.buy_price, pos.buy_count, pos.buy_index = price, 1, i
                actions.append(BUY)
            elif pos.gain(price) > th.buy_threshold:
                pos.buy_price += price
                pos.buy_count += 1
                pos.buy_index = i
                actions.append(BUY)
            else:
                actions.append(HOLD)
            profits.append(0.0)
        elif pos.buy_price is not None:
            g = pos.gain(price)
            if g < th.sell_threshold:
                profits.append(g)
                actions.append(SELL)
                pos.clear()
            else:
                profits.append(0.0)
                actions.append(HOLD)
        else:
            actions.append(HOLD)
            profits.append(0.0)
    return TradeLog(actions=tuple(actions), profits=tuple(profits), dates=tuple(dates))


STRATEGY_KINDS = ("simple", "threshold")


def run_strategy(kind: str, signals, bars, th: ThresholdConfig = ThresholdConfig()) -> TradeLog:
    if kind == "simple":
        return run_simple(signals, bars)
    if kind == "threshold":
        return run_threshold(signals, bars, th)
    raise ConfigError(f"unknown strategy {kind!r}; expected one of {', '.join(STRATEGY_KINDS)}")


def transaction_fees(count: int, fee_per_transaction: float) -> float:
    """Flat-fee cost of ``count`` transactions, in currency units."""
    return count * fee_per_transaction


def apply_fees(log: TradeLog, fee_per_transaction: float, notional_per_trade: float) -> TradeLog:
    """Deduct flat fees, expressed as a percentage of ``notional_per_trade``.

    net = gross - 100 * fee * total / notional
    """
    if fee_per_transaction < 0:
        raise ConfigError("fee must be non-negative")
    if not notional_per_trade > 0:
        raise ConfigError("notional per trade must be positive")
    deduction = 100.0 * transaction_fees(log.total, fee_per_transaction) / notional_per_trade
    return replace(
        log,
        fee_per_transaction=fee_per_transaction,
        notional_per_trade=notional_per_trade,
        net_revenue=log.gross_revenue - deduction,
    )


def count_transactions(log: TradeLog) -> tuple[int, int, int]:
    buys = sells = 0
    for a in log.actions:
        if a == BUY:
            buys += 1
        elif a == SELL:
            sells += 1
    return buys, sells, buys + sells
