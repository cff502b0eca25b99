import io
import math
from dataclasses import replace
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from signaltrader.data import (
    DEFAULT_COLUMNS,
    ColumnMap,
    bars_to_raw,
    build_dataset,
    change_rate,
    clean,
    clean_with_summary,
    min_bars_for,
    parse_table,
    standardize,
    write_bars,
)
from signaltrader.errors import (
    DataError,
    DegenerateFeatureError,
    DomainError,
    EmptyDatasetError,
    InsufficientDataError,
    RowError,
    SchemaError,
)

HEADER = ",".join(
    [
        DEFAULT_COLUMNS.trade_date,
        DEFAULT_COLUMNS.prev_close,
        DEFAULT_COLUMNS.open,
        DEFAULT_COLUMNS.volume,
        DEFAULT_COLUMNS.high,
        DEFAULT_COLUMNS.low,
        DEFAULT_COLUMNS.latest,
        DEFAULT_COLUMNS.amount_rmb,
    ]
)


def make_lines(n, start=date(2022, 1, 3), seed=0):
    rng = np.random.default_rng(seed)
    price = 10.0
    lines = []
    d = start
    for _ in range(n):
        prev = price
        price = max(0.5, price * (1 + rng.normal(0, 0.02)))
        o = prev * (1 + rng.normal(0, 0.005))
        hi, lo = max(o, price) * 1.01, min(o, price) * 0.99
        vol = float(rng.integers(1000, 5000))
        lines.append(f"{d.isoformat()},{prev:.4f},{o:.4f},{vol:.0f},{hi:.4f},{lo:.4f},{price:.4f},{vol * price:.2f}")
        d += timedelta(days=1)
    return lines


def table(lines):
    return HEADER + "\n" + "\n".join(lines) + "\n"


def test_parse_basic_and_comments():
    text = "# produced elsewhere\n" + table(make_lines(3))
    raw = parse_table(io.StringIO(text))
    assert len(raw) == 3
    assert raw[0].trade_date == date(2022, 1, 3)
    assert raw[0].security_code == ""


def test_missing_column_names_the_column():
    text = table(make_lines(2)).replace(DEFAULT_COLUMNS.volume, "vol")
    with pytest.raises(SchemaError) as err:
        parse_table(io.StringIO(text))
    assert err.value.column == DEFAULT_COLUMNS.volume


def test_custom_column_names():
    cols = ColumnMap(trade_date="date", open="o")
    text = table(make_lines(2)).replace(DEFAULT_COLUMNS.trade_date, "date").replace(DEFAULT_COLUMNS.open + ",", "o,")
    raw = parse_table(io.StringIO(text), cols)
    assert len(raw) == 2


def test_bad_number_reports_row():
    lines = make_lines(3)
    lines[1] = lines[1].replace(lines[1].split(",")[2], "abc", 1)
    with pytest.raises(RowError) as err:
        parse_table(io.StringIO(table(lines)))
    assert err.value.row == 2


def test_bad_date_reports_row():
    lines = make_lines(2)
    lines[0] = "03/01/2022" + lines[0][10:]
    with pytest.raises(RowError) as err:
        parse_table(io.StringIO(table(lines)))
    assert err.value.row == 1


def test_blank_cells_parse_as_missing():
    lines = make_lines(2)
    parts = lines[1].split(",")
    parts[4] = ""
    lines[1] = ",".join(parts)
    raw = parse_table(io.StringIO(table(lines)))
    assert raw[1].high is None and raw[1].has_missing()


def test_twenty_rows_two_duplicates_keeps_eighteen():
    lines = make_lines(18)
    lines = lines[:5] + [lines[4]] + lines[5:11] + [lines[10]] + lines[11:]
    bars, summary = clean_with_summary(parse_table(io.StringIO(table(lines))))
    assert summary.input_rows == 20
    assert summary.after_dedup == 18
    assert len(bars) == 18


def test_forward_fill_takes_previous_value():
    lines = make_lines(4)
    parts = lines[2].split(",")
    parts[4] = ""
    lines[2] = ",".join(parts)
    raw = parse_table(io.StringIO(table(lines)))
    bars = clean(raw)
    assert bars[2].high == raw[1].high


def test_leading_missing_row_dropped():
    lines = make_lines(4)
    parts = lines[0].split(",")
    parts[3] = ""
    lines[0] = ",".join(parts)
    bars, summary = clean_with_summary(parse_table(io.StringIO(table(lines))))
    assert summary.after_fill == 3
    assert bars[0].trade_date == date(2022, 1, 4)


def test_negative_volume_dropped():
    lines = make_lines(5)
    parts = lines[2].split(",")
    parts[3] = "-100"
    lines[2] = ",".join(parts)
    bars, summary = clean_with_summary(parse_table(io.StringIO(table(lines))))
    assert summary.after_volume == 4
    assert all(b.volume >= 0 for b in bars)


def test_unsorted_input_is_sorted():
    lines = make_lines(5)
    bars = clean(parse_table(io.StringIO(table(lines[::-1]))))
    assert [b.trade_date for b in bars] == sorted(b.trade_date for b in bars)


def test_repeated_date_keeps_first():
    lines = make_lines(3)
    alt = lines[1].rsplit(",", 1)[0] + ",1.00"
    bars = clean(parse_table(io.StringIO(table(lines[:2] + [alt] + lines[2:]))))
    assert len(bars) == 3


def test_all_rows_removed_raises():
    lines = make_lines(2)
    lines = [",".join(l.split(",")[:3] + ["-5"] + l.split(",")[4:]) for l in lines]
    with pytest.raises(EmptyDatasetError):
        clean(parse_table(io.StringIO(table(lines))))


def test_change_rate():
    assert change_rate(11.0, 10.0) == pytest.approx(0.1)
    assert change_rate(10.0, 10.0) == 0.0
    with pytest.raises(DomainError):
        change_rate(1.0, 0.0)


def test_write_then_parse_round_trips_exactly():
    bars = clean(parse_table(io.StringIO(table(make_lines(30)))))
    buf = io.StringIO()
    write_bars(bars, buf, comment="seed=0")
    again = clean(parse_table(io.StringIO(buf.getvalue())))
    assert again == bars


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 40), st.integers(0, 5))
def test_clean_is_idempotent(seed, n, n_dups):
    rng = np.random.default_rng(seed)
    lines = make_lines(n, seed=seed)
    for _ in range(n_dups):
        lines.insert(int(rng.integers(0, len(lines))), lines[int(rng.integers(0, len(lines)))])
    rng.shuffle(lines)
    once = clean(parse_table(io.StringIO(table(lines))))
    twice = clean(bars_to_raw(once))
    assert twice == once


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=200),
)
def test_standardize_moments(values):
    x = np.asarray(values)
    if np.std(x) <= 1e-6 * max(1.0, abs(np.mean(x))):
        return
    z, p = standardize(x)
    assert abs(z.mean()) < 1e-9
    assert abs(z.var() - 1.0) < 1e-9
    np.testing.assert_allclose(p.apply(x), z)


def test_standardize_constant_rejected():
    with pytest.raises(DegenerateFeatureError):
        standardize(np.full(10, 3.0))


def _bars(n, seed=0):
    return clean(parse_table(io.StringIO(table(make_lines(n, seed=seed)))))


def test_dataset_shapes_and_split():
    bars = _bars(120)
    ds = build_dataset(bars, 100)
    assert ds.features.shape == (100, 7)
    assert ds.split_index == 80
    assert ds.X_train.shape == (80, 7) and ds.X_test.shape == (20, 7)
    assert ds.dates == tuple(b.trade_date for b in bars[-100:])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(20, 150), st.floats(0.1, 0.9))
def test_label_rule_and_chronological_split(seed, window, frac):
    bars = _bars(window + 15, seed=seed)
    ds = build_dataset(bars, window, split_fraction=frac)
    change = np.array([b.change_rate for b in bars[-window:]])
    np.testing.assert_array_equal(ds.labels, (change > 0).astype(int))
    assert ds.split_index == math.floor(frac * window + 1e-9)
    assert max(ds.dates[: ds.split_index]) < min(ds.dates[ds.split_index :])
    # statistics come from the training rows only
    train = ds.X_train
    assert np.all(np.abs(train.mean(axis=0)) < 1e-9)
    assert np.all(np.abs(train.var(axis=0) - 1.0) < 1e-9)


def test_dataset_arrays_are_read_only():
    ds = build_dataset(_bars(60), 40)
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0


def test_insufficient_data():
    bars = _bars(50)
    with pytest.raises(InsufficientDataError) as err:
        build_dataset(bars, 45)
    assert err.value.required == min_bars_for(45)
    assert err.value.available == 50


def test_bad_split_arguments():
    bars = _bars(60)
    with pytest.raises(DataError):
        build_dataset(bars, 40, split_fraction=1.0)
    with pytest.raises(DataError):
        build_dataset(bars, 40, split_mode="random")


def test_constant_feature_dropped():
    bars = _bars(60)
    bars = [replace(b, volume=1000.0) for b in bars]
    ds = build_dataset(bars, 40)
    assert "volume" not in ds.feature_names
    assert ds.features.shape[1] == 6


def test_shuffled_split_is_seeded():
    bars = _bars(80)
    a = build_dataset(bars, 60, split_mode="shuffled", seed=3)
    b = build_dataset(bars, 60, split_mode="shuffled", seed=3)
    c = build_dataset(bars, 60, split_mode="shuffled", seed=4)
    np.testing.assert_array_equal(a.train_mask, b.train_mask)
    assert not np.array_equal(a.train_mask, c.train_mask)
    assert a.train_mask.sum() == 48


def test_single_row_binds_fields_by_name():
    cols = [c for c in HEADER.split(",")]
    shuffled = [cols[k] for k in (3, 0, 7, 1, 6, 2, 5, 4)]
    values = dict(zip(cols, make_lines(1)[0].split(",")))
    text = ",".join(shuffled) + "\n" + ",".join(values[c] for c in shuffled) + "\n"
    (r,) = parse_table(io.StringIO(text))
    assert r.open == float(values[DEFAULT_COLUMNS.open])
    assert r.volume == float(values[DEFAULT_COLUMNS.volume])


def test_missing_open_column():
    text = table(make_lines(2)).replace(DEFAULT_COLUMNS.open, "opening")
    with pytest.raises(SchemaError):
        parse_table(io.StringIO(text))


def test_malformed_middle_date():
    lines = make_lines(3)
    lines[1] = "2022-13-45" + lines[1][10:]
    with pytest.raises(RowError) as err:
        parse_table(io.StringIO(table(lines)))
    assert err.value.row == 2
    assert "row 2" in str(err.value)


def test_identical_rows_collapse():
    lines = make_lines(1) * 2
    assert len(clean(parse_table(io.StringIO(table(lines))))) == 1


def test_missing_latest_filled():
    lines = make_lines(2)
    parts = lines[0].split(",")
    parts[6] = "10.0"
    lines[0] = ",".join(parts)
    parts = lines[1].split(",")
    parts[6] = ""
    lines[1] = ",".join(parts)
    bars = clean(parse_table(io.StringIO(table(lines))))
    assert bars[1].latest == 10.0


def test_change_rate_values():
    assert change_rate(10.5, 10.0) == pytest.approx(0.05, abs=1e-15)
    assert change_rate(9.0, 10.0) == pytest.approx(-0.1, abs=1e-15)
    for x in (0.01, 3.0, 1e6):
        assert change_rate(x, x) == 0.0


def test_standardize_small_vector():
    z, p = standardize(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(z, [-1.22474487, 0.0, 1.22474487], atol=1e-8)
    assert p.std == pytest.approx(math.sqrt(2 / 3))


def test_thousand_bars_window_366():
    ds = build_dataset(_bars(1000), 366)
    assert ds.features.shape[0] == 366
    assert ds.split_index == 292


def test_window_longer_than_history():
    with pytest.raises(InsufficientDataError):
        build_dataset(_bars(100), 200)


def test_all_rising_days_label_one():
    bars = [replace(b, change_rate=abs(b.change_rate) + 1e-3) for b in _bars(80)]
    ds = build_dataset(bars, 60)
    assert np.all(ds.labels == 1)
