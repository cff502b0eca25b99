"""One end-to-end run: dataset, fit, predict, replay, fees, metrics."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import Bar, Dataset, build_dataset
from .errors import ConfigError
from .models import MODEL_KINDS, TrainConfig, predict_signals, train_model
from .report import RunMetrics, accuracy
from .strategy import STRATEGY_KINDS, SignalSeries, ThresholdConfig, TradeLog, apply_fees, run_strategy

REPLAY_SPANS = ("window", "test")


@dataclass(frozen=True)
class BacktestConfig:
    """Everything a run needs besides the bars and the window length.

    ``replay="window"`` trades over every day of the window (training days
    included), which is what the transaction-count tables describe;
    ``replay="test"`` trades only the held-out days.
    """

    model_kind: str = "logistic"
    strategy_kind: str = "simple"
    thresholds: ThresholdConfig = ThresholdConfig()
    fee: float = 0.0
    notional: float = 1000.0
    split_fraction: float = 0.8
    split_mode: str = "chronological"
    replay: str = "window"
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.model_kind!r}")
        if self.strategy_kind not in STRATEGY_KINDS:
            raise ConfigError(f"unknown strategy {self.strategy_kind!r}")
        if self.replay not in REPLAY_SPANS:
            raise ConfigError(f"replay must be one of {REPLAY_SPANS}")
        if self.fee < 0 or not self.notional > 0:
            raise ConfigError("fee must be >= 0 and notional > 0")

    @property
    def seed(self) -> int:
        return self.train.seed


@dataclass(eq=False)
class BacktestResult:
    dataset: Dataset
    model: object
    signals: SignalSeries
    log: TradeLog
    metrics: RunMetrics


def run_backtest(bars: Sequence[Bar], window: int, cfg: BacktestConfig = BacktestConfig(), stock_id: str = "") -> BacktestResult:
    ds = build_dataset(bars, window, cfg.split_fraction, cfg.split_mode, seed=cfg.seed)
    t0 = time.perf_counter()
    model = train_model(cfg.model_kind, ds.X_train, ds.y_train, ds.change_train, cfg.train)
    preds = predict_signals(model, ds.features)

    tail = list(bars[-window:])
    if cfg.replay == "window":
        rows = np.arange(len(ds))
    else:
        rows = np.flatnonzero(~ds.train_mask)
    signals = SignalSeries.from_arrays([ds.dates[i] for i in rows], preds[rows])
    log = run_strategy(cfg.strategy_kind, signals, [tail[i] for i in rows], cfg.thresholds)
    log = apply_fees(log, cfg.fee, cfg.notional)
    elapsed = time.perf_counter() - t0

    metrics = RunMetrics(
        stock_id=stock_id,
        model_kind=cfg.model_kind,
        strategy_kind=cfg.strategy_kind,
        total_time=elapsed,
        total_revenue=log.net_revenue,
        train_accuracy=accuracy(ds.y_train, preds[ds.train_mask]),
        test_accuracy=accuracy(ds.y_test, preds[~ds.train_mask]),
        buys=log.buys,
        sells=log.sells,
        total=log.total,
    )
    return BacktestResult(dataset=ds, model=model, signals=signals, log=log, metrics=metrics)
