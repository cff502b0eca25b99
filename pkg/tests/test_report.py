import json

import pytest

from signaltrader.errors import ShapeError, UsageError
from signaltrader.report import AVG, ReportTable, RunMetrics, accuracy, aggregate, count_table, emit, write_report

STOCKS = [f"S{k}" for k in range(10)]


def run(stock, model="logistic", revenue=1.0, buys=3, sells=2, time=0.5):
    return RunMetrics(stock, model, "simple", time, revenue, 0.9, 0.8, buys, sells, buys + sells)


def test_metrics_validation():
    with pytest.raises(ValueError):
        RunMetrics("a", "svm", "simple", 1.0, 0.0, 1.2, 0.5, 1, 1, 2)
    with pytest.raises(ValueError):
        RunMetrics("a", "svm", "simple", 1.0, 0.0, 0.5, 0.5, 1, 1, 3)
    with pytest.raises(ValueError):
        RunMetrics("a", "svm", "simple", -1.0, 0.0, 0.5, 0.5, 1, 1, 2)


def test_metrics_dict_round_trip():
    r = run("a")
    d = r.to_dict(include_time=False)
    assert "total_time" not in d
    assert RunMetrics.from_dict(d, total_time=0.5) == r


def test_accuracy():
    assert accuracy([1, 0, 1, 1], [1, 1, 1, 0]) == 0.5
    with pytest.raises(ShapeError):
        accuracy([1, 0], [1])


def test_layout_ten_stocks_three_models():
    runs = [run(s, m) for m in ("logistic", "svm", "mlp") for s in STOCKS]
    tables = [aggregate([r for r in runs if r.model_kind == m]) for m in ("logistic", "svm", "mlp")]
    assert len(tables) == 3
    for t in tables:
        assert t.columns == tuple(STOCKS) + (AVG,)
        assert t.row_labels == ("total time(s)", "total revenue(%)", "train_accuracy", "test_accuracy")


def test_single_stock_average_equals_column():
    t = aggregate([run("only", revenue=0.123456789)])
    for label in t.row_labels:
        assert t.cell(label, AVG) == t.cell(label, "only")


def test_emit_is_deterministic_and_round_trips():
    runs = [run(s, revenue=k / 7) for k, s in enumerate(STOCKS)]
    a, b = emit(aggregate(runs), "json"), emit(aggregate(list(runs)), "json")
    assert a == b
    back = ReportTable.from_json(a)
    assert back.cell("total revenue(%)", "S3") == round(3 / 7, 6)
    assert emit(aggregate(runs), "csv").splitlines()[0] == "," + ",".join(STOCKS) + "," + AVG


def test_emit_requires_table():
    with pytest.raises(UsageError):
        emit(None)
    with pytest.raises(UsageError):
        emit(aggregate([run("a")]), "xml")
    with pytest.raises(UsageError):
        aggregate([])


def test_count_table_has_integer_rows(tmp_path):
    runs = [run(s, m, buys=k + 1, sells=k) for k, s in enumerate(STOCKS) for m in ("logistic", "svm")]
    t = count_table(runs)
    assert t.columns == tuple(STOCKS)
    assert t.row_labels[:3] == ("buys (logistic)", "sells (logistic)", "total (logistic)")
    csv_text = emit(t, "csv")
    assert "total (svm),1,3,5" in csv_text
    write_report(t, tmp_path / "counts.json")
    assert json.loads((tmp_path / "counts.json").read_text())["rows"][2]["values"][1] == 3


def test_accuracy_examples():
    assert accuracy([1, 0, 1], [1, 0, 1]) == 1.0
    assert accuracy([1, 0, 1], [0, 1, 0]) == 0.0
    assert accuracy([1, 0, 1, 0], [1, 0, 0, 0]) == 0.75


def test_two_run_average():
    t = aggregate([run("a", revenue=1.0), run("b", revenue=3.0)])
    assert t.cell("total revenue(%)", AVG) == 2.0
