"""Grid search over the training-window length.

Every candidate window is evaluated independently (build, fit, replay) and
scored by the replay's revenue.  The best window is the first one reaching
the maximum, scanning in grid order from a running best of ``-inf``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from .backtest import BacktestConfig, run_backtest
from .errors import ConfigError, DataError, RuntimeFailure, SweepError

# half-year steps
DEFAULT_WINDOWS = tuple(183 * k for k in range(1, 10))


@dataclass(frozen=True)
class WindowOutcome:
    window: int
    revenue: float | None
    skipped_reason: str = ""

    @property
    def skipped(self) -> bool:
        return self.revenue is None


@dataclass(frozen=True)
class SweepResult:
    per_window: tuple[WindowOutcome, ...]
    best_window: int
    best_revenue: float

    def evaluated(self) -> list[tuple[int, float]]:
        return [(o.window, o.revenue) for o in self.per_window if not o.skipped]

    def to_csv(self, comment: str | None = None) -> str:
        buf = io.StringIO()
        if comment:
            for line in comment.splitlines():
                buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["window", "revenue_percent", "skipped_reason"])
        for o in self.per_window:
            w.writerow([o.window, "" if o.skipped else f"{o.revenue:.6f}", o.skipped_reason])
        return buf.getvalue()


def best_of(outcomes: Sequence[WindowOutcome]) -> tuple[int, float]:
    best, best_window = -math.inf, None
    for o in outcomes:
        if o.skipped:
            continue
        if o.revenue > best:
            best, best_window = o.revenue, o.window
    if best_window is None:
        raise SweepError("every window was skipped")
    return best_window, best


def sweep_windows(
    bars,
    windows: Sequence[int] = DEFAULT_WINDOWS,
    cfg: BacktestConfig = BacktestConfig(),
    evaluator: Callable[[object, int], float] | None = None,
    max_workers: int = 1,
) -> SweepResult:
    """Score each window and pick the best.

    ``evaluator(bars, window)`` returns the revenue for one window; the
    default runs :func:`~signaltrader.backtest.run_backtest` with ``cfg`` and
    takes the net revenue.  A window whose evaluation fails with a data or
    numerical error is recorded as skipped.  With ``max_workers > 1`` windows
    run on a thread pool; results are still reported in grid order.
    """
    windows = list(windows)
    if not windows:
        raise ConfigError("window grid is empty")
    if evaluator is None:
        def evaluator(b, w):
            return run_backtest(b, w, cfg).log.net_revenue

    def one(w):
        try:
            return WindowOutcome(int(w), float(evaluator(bars, w)))
        except (DataError, RuntimeFailure) as exc:
            return WindowOutcome(int(w), None, str(exc))

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = tuple(pool.map(one, windows))
    else:
        outcomes = tuple(one(w) for w in windows)
    best_window, best_revenue = best_of(outcomes)
    return SweepResult(per_window=outcomes, best_window=best_window, best_revenue=best_revenue)
