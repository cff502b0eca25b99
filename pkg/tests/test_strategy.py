import math
from datetime import date, timedelta

import numpy as np
import pytest

from oracles import simple_oracle, threshold_oracle
from signaltrader.errors import ConfigError, ShapeError
from signaltrader.strategy import (
    BUY,
    HOLD,
    SELL,
    SignalSeries,
    ThresholdConfig,
    TradeLog,
    align_signals,
    apply_fees,
    count_transactions,
    run_simple,
    run_strategy,
    run_threshold,
    transaction_fees,
)


def days(n, start=date(2023, 1, 2)):
    return [start + timedelta(days=k) for k in range(n)]


def test_hand_fixture_simple():
    log = run_simple([1, 0, 0], [10.0, 11.0, 12.0])
    assert log.actions == (BUY, SELL, HOLD)
    assert log.profits == pytest.approx((0.0, 0.1, 0.0), abs=0)
    assert log.profits[1] == (11.0 - 10.0) / 10.0


def test_simple_rebuys_over_open_position():
    log = run_simple([1, 1, 0], [10.0, 12.0, 15.0])
    assert log.actions == (BUY, BUY, SELL)
    # cost basis was reset to 12 by the second buy
    assert log.profits[2] == (15.0 - 12.0) / 12.0


def test_threshold_accumulates_and_gates_exit():
    th = ThresholdConfig(buy_threshold=0.05, sell_threshold=0.3)
    log = run_threshold([1, 1, 1, 0, 0], [10.0, 10.2, 11.0, 14.0, 12.0], th)
    # day 1: gain 2% < 5%, hold; day 2: gain 10% > 5%, add a lot
    assert log.actions == (BUY, HOLD, BUY, HOLD, SELL)
    assert log.profits[3] == 0.0
    assert log.profits[4] == (12.0 * 2 - 21.0) / 21.0


@pytest.mark.parametrize("seed", range(3))
def test_agrees_with_oracles(seed):
    rng = np.random.default_rng(seed)
    for _ in range(200):
        sig = rng.integers(0, 2, size=50).tolist()
        opens = np.round(rng.uniform(5, 15, size=50), 2).tolist()
        p, a = simple_oracle(sig, opens)
        log = run_simple(sig, opens)
        assert list(log.actions) == a and list(log.profits) == p
        b, s = rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.2)
        p, a = threshold_oracle(sig, opens, b, s)
        log = run_threshold(sig, opens, ThresholdConfig(b, s))
        assert list(log.actions) == a and list(log.profits) == p


def test_open_gates_reduce_to_simple_rule():
    rng = np.random.default_rng(10)
    th = ThresholdConfig(buy_threshold=math.inf, sell_threshold=math.inf)
    for _ in range(200):
        # never two consecutive 1s, so the simple rule never re-buys over a position
        sig = rng.integers(0, 2, size=50)
        for k in range(1, 50):
            if sig[k] == 1 and sig[k - 1] == 1:
                sig[k] = 0
        opens = rng.uniform(5, 15, size=50).tolist()
        a = run_simple(sig.tolist(), opens)
        b = run_threshold(sig.tolist(), opens, th)
        assert a.actions == b.actions and a.profits == b.profits


def test_total_is_buys_plus_sells():
    rng = np.random.default_rng(1)
    for _ in range(50):
        sig = rng.integers(0, 2, size=30).tolist()
        opens = rng.uniform(1, 2, size=30).tolist()
        for log in (run_simple(sig, opens), run_threshold(sig, opens)):
            assert log.total == log.buys + log.sells
            assert count_transactions(log) == (log.buys, log.sells, log.total)


def test_threshold_never_trades_more_than_simple():
    rng = np.random.default_rng(2)
    for _ in range(200):
        sig = rng.integers(0, 2, size=40).tolist()
        opens = rng.uniform(5, 15, size=40).tolist()
        th = ThresholdConfig(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2))
        assert run_threshold(sig, opens, th).total <= run_simple(sig, opens).total


def test_fee_arithmetic():
    assert transaction_fees(169, 10.0) == 1690.0
    log = run_simple([1, 0, 1, 0], [10.0, 11.0, 10.0, 12.0])
    net = apply_fees(log, 10.0, 1000.0)
    assert net.net_revenue == log.gross_revenue - log.total
    with pytest.raises(ConfigError):
        apply_fees(log, -1.0, 1000.0)
    with pytest.raises(ConfigError):
        apply_fees(log, 1.0, 0.0)


def test_revenue_is_percent_sum():
    log = run_simple([1, 0, 1, 0], [10.0, 11.0, 10.0, 9.0])
    assert log.gross_revenue == pytest.approx(100 * (0.1 - 0.1))
    assert log.cumulative_returns()[-1] == pytest.approx(log.gross_revenue)


def test_align_signals_offsets():
    d = days(10)
    s = align_signals(d, [1, 0, 1, 1], 4)
    assert s.dates == tuple(d[6:])
    # signal for bar i is predictions[i - len(dates) + window]
    assert s.signals[8 - 10 + 4] == 1
    with pytest.raises(ShapeError):
        align_signals(d, [1, 0], 4)


def test_signal_series_validation():
    d = days(3)
    with pytest.raises(ShapeError):
        SignalSeries.from_arrays(d, [1, 0])
    with pytest.raises(ShapeError):
        SignalSeries.from_arrays([d[1], d[0], d[2]], [1, 0, 1])
    with pytest.raises(ValueError):
        SignalSeries.from_arrays(d, [1, 2, 0])


def test_mismatched_lengths_rejected():
    with pytest.raises(ShapeError):
        run_simple([1, 0], [10.0])
    with pytest.raises(ConfigError):
        run_strategy("martingale", [1], [1.0])


def test_csv_plot_data():
    d = days(3)
    log = run_simple(SignalSeries.from_arrays(d, [1, 0, 0]), [10.0, 11.0, 12.0])
    text = log.to_csv(comment="seed=0")
    lines = text.splitlines()
    assert lines[0] == "# seed=0"
    assert lines[1] == "date,action,profit,cumulative_return"
    assert lines[3].startswith(f"{d[1].isoformat()},sell,0.1,")


def test_trade_log_validates():
    with pytest.raises(ShapeError):
        TradeLog(actions=(BUY,), profits=())


def test_all_zero_and_all_one_signals():
    log = run_simple([0] * 5, [10.0] * 5)
    assert log.actions == (HOLD,) * 5 and set(log.profits) == {0.0}
    log = run_simple([1] * 5, [10.0, 11.0, 9.0, 12.0, 8.0])
    assert log.actions == (BUY,) * 5 and log.sells == 0 and set(log.profits) == {0.0}


def test_add_on_blocked_below_buy_gate():
    log = run_threshold([1, 1, 0], [10.0, 10.0, 10.0], ThresholdConfig(buy_threshold=0.5))
    assert log.actions[:2] == (BUY, HOLD)


def test_wide_open_gates():
    th = ThresholdConfig(buy_threshold=-math.inf, sell_threshold=math.inf)
    sig = [1, 1, 0, 0, 1, 0]
    log = run_threshold(sig, [10.0, 11.0, 12.0, 12.0, 9.0, 10.0], th)
    assert log.actions == (BUY, BUY, SELL, HOLD, BUY, SELL)


def test_exit_blocked_by_sell_gate():
    log = run_threshold([1, 0], [10.0, 12.0], ThresholdConfig(sell_threshold=-0.05))
    assert log.actions == (BUY, HOLD) and log.sells == 0


def test_fee_identity_and_linearity():
    log = run_simple([1, 0, 1, 0], [10.0, 11.0, 10.0, 12.0])
    assert apply_fees(log, 0.0, 500.0).net_revenue == log.gross_revenue
    d1 = log.gross_revenue - apply_fees(log, 5.0, 500.0).net_revenue
    d2 = log.gross_revenue - apply_fees(log, 10.0, 500.0).net_revenue
    assert d2 == pytest.approx(2 * d1)
    assert transaction_fees(75, 10.0) == 750.0


def test_counts_of_empty_and_idle_logs():
    assert count_transactions(TradeLog((), ())) == (0, 0, 0)
    assert count_transactions(run_simple([0, 0], [1.0, 1.0])) == (0, 0, 0)
    log = TradeLog((BUY,) * 163 + (SELL,) * 95, (0.0,) * 258)
    assert count_transactions(log) == (163, 95, 258)


def test_replay_is_pure():
    d = days(30)
    rng = np.random.default_rng(4)
    sig = SignalSeries.from_arrays(d, rng.integers(0, 2, 30))
    opens = rng.uniform(5, 6, 30).tolist()
    assert run_threshold(sig, opens).to_csv() == run_threshold(sig, opens).to_csv()
