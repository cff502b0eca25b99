import warnings

import numpy as np
import pytest

from oracles import rbf_gram, svm_dual_oracle
from signaltrader.errors import ConvergenceWarning, DegenerateLabelsError, ShapeError
from signaltrader.models import TrainConfig, fit_svm_smo, predict_signals, rbf_kernel, svm_predict
from signaltrader.models.svm import dual_objective, kkt_violations, rbf_kernel_matrix, to_pm


def random_problem(rng, n_max=10):
    n = int(rng.integers(4, n_max + 1))
    d = int(rng.integers(1, 4))
    X = rng.normal(scale=2.0, size=(n, d))
    y = rng.integers(0, 2, size=n)
    y[0], y[1] = 0, 1
    return X, y


def test_kernel_matrix_matches_loops():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(6, 3))
    np.testing.assert_allclose(rbf_kernel_matrix(X, X, 0.3), rbf_gram(X, 0.3), atol=1e-14)
    assert rbf_kernel(X[0], X[0], 0.3) == 1.0
    with pytest.raises(ShapeError):
        rbf_kernel(X[0], X[0, :2], 0.3)


def test_label_mapping():
    np.testing.assert_array_equal(to_pm([0, 1, 1]), [-1.0, 1.0, 1.0])
    np.testing.assert_array_equal(to_pm([-1, 1]), [-1.0, 1.0])
    with pytest.raises(ValueError):
        to_pm([0, 2])


def test_single_class_rejected():
    with pytest.raises(DegenerateLabelsError):
        fit_svm_smo(np.zeros((4, 2)), np.ones(4))


def test_matches_dual_oracle():
    rng = np.random.default_rng(11)
    for _ in range(8):
        X, y = random_problem(rng)
        m = fit_svm_smo(X, y, gamma=0.1, C=0.8)
        _, best = svm_dual_oracle(X, to_pm(y), 0.1, 0.8)
        assert m.info["dual_objective"] == pytest.approx(best, abs=1e-4)
        assert m.info["kkt_violation"] <= 1e-3
        assert abs(m.info["equality_residual"]) < 1e-6
        assert np.all(m.alphas > 0) and np.all(m.alphas <= 0.8 + 1e-12)


def test_separable_clusters_classified():
    rng = np.random.default_rng(3)
    X = np.vstack([rng.normal(-2, 0.3, size=(15, 2)), rng.normal(2, 0.3, size=(15, 2))])
    y = np.array([0] * 15 + [1] * 15)
    m = fit_svm_smo(X, y, gamma=0.5, C=10.0)
    np.testing.assert_array_equal(m.predict(X), y)
    assert svm_predict(m, np.array([2.0, 2.0])) == 1
    assert svm_predict(m, np.array([-2.0, -2.0])) == 0


def test_decision_values_from_support_vectors_only():
    rng = np.random.default_rng(4)
    X, y = random_problem(rng)
    m = fit_svm_smo(X, y)
    K = rbf_kernel_matrix(X, m.support_vectors, m.gamma)
    np.testing.assert_allclose(m.decision_function(X), K @ (m.alphas * m.sv_labels) + m.bias)


def test_kkt_helper_flags_violations():
    K = np.eye(2)
    y = np.array([1.0, -1.0])
    v = kkt_violations(np.zeros(2), y, K, 0.0, 1.0)
    np.testing.assert_allclose(v, [1.0, 1.0])
    assert dual_objective(np.zeros(2), y, K) == 0.0


def test_seeded_runs_are_identical():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(40, 3))
    y = (X[:, 0] + rng.normal(scale=0.5, size=40) > 0).astype(int)
    a = fit_svm_smo(X, y, cfg=TrainConfig(seed=2))
    b = fit_svm_smo(X, y, cfg=TrainConfig(seed=2))
    np.testing.assert_array_equal(a.alphas, b.alphas)
    assert a.bias == b.bias


def test_unreachable_tolerance_warns():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(30, 2))
    y = rng.integers(0, 2, size=30)
    y[:2] = [0, 1]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        m = fit_svm_smo(X, y, cfg=TrainConfig(svm_max_passes=1, svm_tol=1e-14))
    if m.info["kkt_violation"] > 1e-14:
        assert any(issubclass(w.category, ConvergenceWarning) for w in caught)


def test_predict_signals_uses_strict_sign():
    rng = np.random.default_rng(9)
    X, y = random_problem(rng)
    m = fit_svm_smo(X, y)
    np.testing.assert_array_equal(predict_signals(m, X), (m.decision_function(X) > 0).astype(int))


def test_kernel_values():
    assert rbf_kernel([1.0, 2.0], [1.0, 2.0], 7.0) == 1.0
    assert rbf_kernel([0.0, 0.0], [1.0, 0.0], 0.1) == pytest.approx(0.904837, abs=1e-6)


def test_symmetric_two_point_problem():
    X = np.array([[-1.0], [1.0]])
    y = np.array([0, 1])
    m = fit_svm_smo(X, y, gamma=0.01, C=100.0)
    assert m.alphas.size == 2
    assert m.alphas[0] == pytest.approx(m.alphas[1], abs=1e-6)
    assert m.bias == pytest.approx(0.0, abs=1e-6)
    np.testing.assert_array_equal(m.predict(X), y)


def test_zero_decision_maps_to_zero():
    from signaltrader.models import SvmModel

    m = SvmModel(np.zeros((0, 2)), np.zeros(0), np.zeros(0), 0.0, 0.1, 0.8)
    assert svm_predict(m, np.array([1.0, 1.0])) == 0


def test_predictions_are_thread_safe():
    from concurrent.futures import ThreadPoolExecutor

    rng = np.random.default_rng(12)
    X, y = random_problem(rng)
    m = fit_svm_smo(X, y)
    ref = predict_signals(m, X)
    with ThreadPoolExecutor(4) as pool:
        outs = list(pool.map(lambda _: predict_signals(m, X), range(16)))
    assert all(np.array_equal(o, ref) for o in outs)
