"""Daily-bar signal backtesting: cleaning, three classifiers, two trading rules."""

from .backtest import BacktestConfig, BacktestResult, run_backtest
from .data import (
    Bar,
    ColumnMap,
    Dataset,
    build_dataset,
    change_rate,
    clean,
    clean_with_summary,
    parse_table,
    read_bars,
    read_table,
    standardize,
)
from .errors import (
    ConfigError,
    ConvergenceWarning,
    DataError,
    RuntimeFailure,
    SignalTraderError,
)
from .models import MODEL_KINDS, TrainConfig, predict_signals, train_model
from .report import RunMetrics, ReportTable, accuracy, aggregate, count_table, emit
from .strategy import SignalSeries, ThresholdConfig, TradeLog, align_signals, apply_fees, run_simple, run_strategy, run_threshold
from .window import DEFAULT_WINDOWS, SweepResult, sweep_windows

__version__ = "0.1.0"

__all__ = [
    "BacktestConfig",
    "BacktestResult",
    "run_backtest",
    "Bar",
    "ColumnMap",
    "Dataset",
    "build_dataset",
    "change_rate",
    "clean",
    "clean_with_summary",
    "parse_table",
    "read_bars",
    "read_table",
    "standardize",
    "ConfigError",
    "ConvergenceWarning",
    "DataError",
    "RuntimeFailure",
    "SignalTraderError",
    "MODEL_KINDS",
    "TrainConfig",
    "predict_signals",
    "train_model",
    "RunMetrics",
    "ReportTable",
    "accuracy",
    "aggregate",
    "count_table",
    "emit",
    "SignalSeries",
    "ThresholdConfig",
    "TradeLog",
    "align_signals",
    "apply_fees",
    "run_simple",
    "run_strategy",
    "run_threshold",
    "DEFAULT_WINDOWS",
    "SweepResult",
    "sweep_windows",
]
