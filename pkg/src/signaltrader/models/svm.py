"""Soft-margin RBF support vector machine trained by SMO.

The dual problem

    maximise   W(a) = sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    subject to 0 <= a_i <= C,  sum_i a_i y_i = 0

is solved two multipliers at a time.  Working pairs follow Platt's
heuristics: the outer loop alternates between sweeps over every sample and
sweeps over the non-bound ones (0 < a < C); for a KKT-violating first
multiplier the second is the non-bound sample maximising ``|E1 - E2|``, with
fallbacks over the non-bound set and then the whole set.

Decision values use ``f(x) = sum_i a_i y_i K(x_i, x) + b``.  Public labels
are {0, 1}; internally they are {-1, +1}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceWarning, DegenerateLabelsError, ShapeError
from .base import TrainConfig


def rbf_kernel(x1, x2, gamma: float) -> float:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape:
        raise ShapeError(f"kernel arguments differ in shape: {x1.shape} vs {x2.shape}")
    d = x1 - x2
    return float(np.exp(-gamma * float(d @ d)))


def rbf_kernel_matrix(A, B, gamma: float) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ShapeError(f"kernel arguments differ in dimension: {A.shape[1]} vs {B.shape[1]}")
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def to_pm(y) -> np.ndarray:
    """Map labels {0, 1} to {-1, +1}; {-1, +1} passes through."""
    y = np.asarray(y)
    vals = set(np.unique(y).tolist())
    if vals <= {0, 1}:
        return np.where(y == 1, 1.0, -1.0)
    if vals <= {-1, 1}:
        return y.astype(float)
    raise ValueError(f"labels must be in {{0, 1}} or {{-1, +1}}, got {sorted(vals)}")


@dataclass(frozen=True, eq=False)
class SvmModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    sv_labels: np.ndarray
    bias: float
    gamma: float
    C: float
    info: dict = field(default_factory=dict)

    kind = "svm"

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} features, got {X.shape[1]}")
        if self.alphas.size == 0:
            return np.full(X.shape[0], self.bias)
        K = rbf_kernel_matrix(X, self.support_vectors, self.gamma)
        return K @ (self.alphas * self.sv_labels) + self.bias

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(np.int64)


def svm_predict(model: SvmModel, x) -> int:
    """Signal for one sample: 1 when the decision value is strictly positive."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError("svm_predict takes a single feature vector")
    return int(model.decision_function(x[None, :])[0] > 0)


def dual_objective(alphas, y, K) -> float:
    ay = np.asarray(alphas) * np.asarray(y)
    return float(np.sum(alphas) - 0.5 * ay @ K @ ay)


def _bias_from_alphas(alphas, y, K, C, bound_tol):
    """Bias from the free multipliers, or the middle of the feasible interval."""
    g = K @ (alphas * y)
    free = (alphas > bound_tol) & (alphas < C - bound_tol)
    if free.any():
        return float(np.mean(y[free] - g[free]))
    # every sample at a bound: KKT gives an interval for b
    lo, hi = -np.inf, np.inf
    at_zero = alphas <= bound_tol
    for i in range(y.size):
        # at zero: y f >= 1; at C: y f <= 1
        needs_ge = at_zero[i]
        edge = y[i] - g[i]
        if (y[i] > 0) == needs_ge:
            lo = max(lo, edge)
        else:
            hi = min(hi, edge)
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    if np.isfinite(lo):
        return float(lo)
    if np.isfinite(hi):
        return float(hi)
    return 0.0


def kkt_violations(alphas, y, K, b, C, bound_tol=None) -> np.ndarray:
    """Per-sample KKT violation of a dual point with bias ``b``."""
    if bound_tol is None:
        bound_tol = 1e-10 * C
    margin = y * (K @ (alphas * y) + b)
    at_zero = alphas <= bound_tol
    at_c = alphas >= C - bound_tol
    return np.where(
        at_zero,
        np.maximum(0.0, 1.0 - margin),
        np.where(at_c, np.maximum(0.0, margin - 1.0), np.abs(margin - 1.0)),
    )


POLISH_FACTOR = 1e-3


class _Smo:
    def __init__(self, K, y, C, tol, rng):
        self.K = K
        self.y = y
        self.C = C
        self.tol = tol
        self.rng = rng
        self.n = y.size
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        # E_i = f(x_i) - y_i with alpha = 0, b = 0
        self.E = -y.astype(float)
        self.bound_tol = 1e-10 * C
        self.steps = 0

    def _non_bound(self):
        a = self.alpha
        return np.flatnonzero((a > self.bound_tol) & (a < self.C - self.bound_tol))

    def take_step(self, i1, i2) -> bool:
        if i1 == i2:
            return False
        K, y, C = self.K, self.y, self.C
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = y[i1], y[i2]
        E1, E2 = self.E[i1], self.E[i2]
        s = y1 * y2
        if y1 != y2:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        if H - L < 1e-14:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 1e-12:
            a2n = min(max(a2 + y2 * (E1 - E2) / eta, L), H)
        else:
            # flat direction: take the end point with the larger dual value
            g1 = E1 + y1 - self.b
            g2 = E2 + y2 - self.b
            gains = []
            for a2c in (L, H):
                d1 = s * (a2 - a2c)
                d2 = a2c - a2
                gains.append(
                    d1 + d2 - d1 * y1 * g1 - d2 * y2 * g2
                    - 0.5 * (d1 * d1 * k11 + d2 * d2 * k22 + 2.0 * s * d1 * d2 * k12)
                )
            if gains[0] > gains[1] + 1e-12:
                a2n = L
            elif gains[1] > gains[0] + 1e-12:
                a2n = H
            else:
                a2n = a2
        if abs(a2n - a2) < 1e-12 * (a2n + a2 + 1e-12):
            return False
        a1n = a1 + s * (a2 - a2n)
        # snap round-off onto the box
        if a1n < self.bound_tol:
            a2n += s * a1n
            a1n = 0.0
        elif a1n > C - self.bound_tol:
            a2n += s * (a1n - C)
            a1n = C
        if a2n < self.bound_tol:
            a2n = 0.0
        elif a2n > C - self.bound_tol:
            a2n = C

        d1 = y1 * (a1n - a1)
        d2 = y2 * (a2n - a2)
        b1 = self.b - E1 - d1 * k11 - d2 * k12
        b2 = self.b - E2 - d1 * k12 - d2 * k22
        free1 = self.bound_tol < a1n < C - self.bound_tol
        free2 = self.bound_tol < a2n < C - self.bound_tol
        if free1:
            b_new = b1
        elif free2:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        self.E += d1 * K[i1] + d2 * K[i2] + (b_new - self.b)
        self.alpha[i1], self.alpha[i2] = a1n, a2n
        self.b = b_new
        self.steps += 1
        return True

    def examine(self, i2) -> int:
        y2, a2, E2 = self.y[i2], self.alpha[i2], self.E[i2]
        r2 = E2 * y2
        if not ((r2 < -self.tol and a2 < self.C - self.bound_tol) or (r2 > self.tol and a2 > self.bound_tol)):
            return 0
        nb = self._non_bound()
        if nb.size > 1:
            i1 = int(nb[np.argmax(np.abs(self.E[nb] - E2))])
            if self.take_step(i1, i2):
                return 1
        if nb.size:
            start = int(self.rng.integers(nb.size))
            for i1 in np.roll(nb, -start):
                if self.take_step(int(i1), i2):
                    return 1
        start = int(self.rng.integers(self.n))
        for i1 in np.roll(np.arange(self.n), -start):
            if self.take_step(int(i1), i2):
                return 1
        return 0

    def max_violating_pair(self):
        """(i_up, i_low, gap) over the b-free optimality test.

        With F_i = g_i - y_i the dual point is optimal within ``t`` iff
        max F over I_low <= min F over I_up + 2t.
        """
        a, y, C, tol = self.alpha, self.y, self.C, self.bound_tol
        F = self.E - self.b
        up = ((y > 0) & (a < C - tol)) | ((y < 0) & (a > tol))
        low = ((y > 0) & (a > tol)) | ((y < 0) & (a < C - tol))
        if not up.any() or not low.any():
            return -1, -1, 0.0
        i_up = int(np.flatnonzero(up)[np.argmin(F[up])])
        i_low = int(np.flatnonzero(low)[np.argmax(F[low])])
        return i_up, i_low, float(F[i_low] - F[i_up])

    def polish(self, pair_tol, max_steps) -> int:
        steps = 0
        while steps < max_steps:
            i_up, i_low, gap = self.max_violating_pair()
            if gap <= 2.0 * pair_tol or not self.take_step(i_up, i_low):
                break
            steps += 1
        return steps

    def run(self, max_passes) -> int:
        examine_all = True
        changed = 0
        passes = 0
        while (changed > 0 or examine_all) and passes < max_passes:
            idx = range(self.n) if examine_all else self._non_bound()
            changed = sum(self.examine(int(i)) for i in idx)
            if examine_all:
                examine_all = False
            elif changed == 0:
                examine_all = True
            passes += 1
        return passes


def fit_svm_smo(X, y, gamma: float | None = None, C: float | None = None, cfg: TrainConfig = TrainConfig()) -> SvmModel:
    """Train a binary RBF SVM.

    ``y`` may be {0, 1} or {-1, +1}.  ``gamma`` and ``C`` default to the
    values in ``cfg`` (0.1 and 0.8).  After the SMO loop the bias is
    recomputed as the mean over free support vectors and the KKT conditions
    are checked at ``cfg.svm_tol``; a residual violation raises a
    :class:`ConvergenceWarning` with the achieved value.
    """
    gamma = cfg.gamma if gamma is None else gamma
    C = cfg.C if C is None else C
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y_pm = to_pm(y)
    if X.shape[0] != y_pm.size:
        raise ShapeError(f"X has {X.shape[0]} rows but y has {y_pm.size} labels")
    if y_pm.size < 2 or np.unique(y_pm).size < 2:
        raise DegenerateLabelsError("SVM training needs both classes present")

    K = rbf_kernel_matrix(X, X, gamma)
    rng = np.random.default_rng(cfg.seed)
    smo = _Smo(K, y_pm, C, cfg.svm_tol, rng)
    passes = smo.run(cfg.svm_max_passes)
    # Platt's running bias cannot certify small tolerances; finish with
    # maximal-violating-pair steps, whose test does not involve b
    polish_steps = smo.polish(POLISH_FACTOR * cfg.svm_tol, max_steps=200 * y_pm.size + 1000)

    alpha = smo.alpha
    b = _bias_from_alphas(alpha, y_pm, K, C, smo.bound_tol)
    viol = float(kkt_violations(alpha, y_pm, K, b, C, smo.bound_tol).max())
    if viol > cfg.svm_tol:
        warnings.warn(
            f"SMO stopped after {passes} passes with KKT violation {viol:.3g} > {cfg.svm_tol:g}",
            ConvergenceWarning,
            stacklevel=2,
        )
    sv = alpha > smo.bound_tol
    return SvmModel(
        support_vectors=X[sv].copy(),
        alphas=alpha[sv].copy(),
        sv_labels=y_pm[sv].copy(),
        bias=float(b),
        gamma=float(gamma),
        C=float(C),
        info={
            "passes": passes,
            "steps": smo.steps,
            "polish_steps": polish_steps,
            "kkt_violation": viol,
            "dual_objective": dual_objective(alpha, y_pm, K),
            "equality_residual": float(alpha @ y_pm),
            "n_support": int(sv.sum()),
        },
    )
