"""
From a raw daily table to a standardized dataset
================================================

Parse one of the bundled synthetic tables, clean it, and build the
window dataset the classifiers train on.
"""

from signaltrader.data import build_dataset, clean_with_summary, read_table
from signaltrader.synthetic import bundled_stock_paths

path = bundled_stock_paths()[0]
raw = read_table(path)
print(f"{path.name}: {len(raw)} raw rows")

# Each cleaning rule reports how many rows survive it.  The bundled tables
# carry two duplicated rows, one blank cell and one negative volume.
bars, summary = clean_with_summary(raw)
print("\n".join(summary.lines()))

# %%
# The dataset covers the last ``window`` days.  Labels mark days whose
# closing change was positive; scaling is fitted on the first 80% only.
ds = build_dataset(bars, window=366)
print(ds.feature_names)
print("train rows", ds.X_train.shape[0], "test rows", ds.X_test.shape[0])
print("share of up days in training:", round(float(ds.y_train.mean()), 3))
print("train means ~0:", ds.X_train.mean(axis=0).round(12))

# %%
# The features include the same day's latest price, so the label is nearly
# a function of the inputs.  Accuracies on real data will look inflated
# for the same reason.
