"""
Choosing the training window and tabulating results
===================================================
"""

from signaltrader.backtest import BacktestConfig, run_backtest
from signaltrader.data import read_bars
from signaltrader.report import aggregate, count_table, emit
from signaltrader.synthetic import bundled_stock_paths
from signaltrader.window import sweep_windows

stocks = {p.stem: read_bars(p) for p in bundled_stock_paths()[:3]}

# %%
# Windows longer than the history are skipped with a reason rather than
# stopping the sweep.
res = sweep_windows(stocks["SYN01"], cfg=BacktestConfig(model_kind="logistic"))
print(res.to_csv())
print("best window:", res.best_window)

# %%
# One metrics record per model and stock, then the comparison tables.
runs = [
    run_backtest(bars, 366, BacktestConfig(model_kind=kind), stock).metrics
    for kind in ("logistic", "svm", "mlp")
    for stock, bars in stocks.items()
]
for kind in ("logistic", "svm", "mlp"):
    print(emit(aggregate([r for r in runs if r.model_kind == kind], title=kind)))
print(emit(count_table(runs)))
