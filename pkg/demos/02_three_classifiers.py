"""
Logistic regression, SVM and a small network on one stock
=========================================================
"""

import time

import numpy as np

from signaltrader.data import build_dataset, read_bars
from signaltrader.models import TrainConfig, predict_signals, train_model
from signaltrader.synthetic import bundled_stock_paths

bars = read_bars(bundled_stock_paths()[2])
ds = build_dataset(bars, window=366)
cfg = TrainConfig(seed=0)

# %%
# Fixed-step descent and BFGS minimise the same cross-entropy; BFGS gets
# there in a handful of iterations.
for kind in ("logistic-gd", "logistic", "svm", "mlp"):
    t0 = time.perf_counter()
    model = train_model(kind, ds.X_train, ds.y_train, ds.change_train, cfg)
    secs = time.perf_counter() - t0
    test_acc = np.mean(predict_signals(model, ds.X_test) == ds.y_test)
    extra = {k: v for k, v in model.info.items() if isinstance(v, (int, float, bool))}
    print(f"{kind:12s} {secs:6.3f} s  test accuracy {test_acc:.3f}  {extra}")

# %%
# The network regresses the change rate itself; its sign is the signal.
mlp = train_model("mlp", ds.X_train, ds.y_train, ds.change_train, cfg)
print("first validation losses:", np.round(mlp.info["val_loss"][:5], 7))
