"""
Replaying signals: the simple rule, the gated rule, and fees
============================================================
"""

from signaltrader.backtest import BacktestConfig, run_backtest
from signaltrader.data import read_bars
from signaltrader.strategy import ThresholdConfig, run_simple, run_threshold
from signaltrader.synthetic import bundled_stock_paths

# %%
# A three-day toy: buy at 10, sell at 11 for a 10% profit, then stay flat.
log = run_simple([1, 0, 0], [10.0, 11.0, 12.0])
print(log.actions, log.profits)

# %%
# The simple rule buys on every 1, even with a position open, which resets
# the cost basis.  The gated rule adds a lot only once the position gains
# more than ``buy_threshold`` and exits only below ``sell_threshold``.
sig, opens = [1, 1, 1, 0, 0], [10.0, 10.2, 11.0, 14.0, 12.0]
print(run_simple(sig, opens).actions)
print(run_threshold(sig, opens, ThresholdConfig(0.05, 0.3)).actions)

# %%
# On a real replay, a flat fee per transaction is charged as a percentage
# of the amount traded each time.
bars = read_bars(bundled_stock_paths()[4])
for strategy in ("simple", "threshold"):
    r = run_backtest(bars, 366, BacktestConfig(strategy_kind=strategy, fee=10.0, notional=1000.0))
    s = r.log.summary()
    print(f"{strategy:9s} buys {s['buys']:3d} sells {s['sells']:3d} "
          f"gross {s['gross_revenue_percent']:8.2f}%  net {s['net_revenue_percent']:8.2f}%")
