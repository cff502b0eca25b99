"""Quasi-Newton minimisation with the BFGS inverse-Hessian update."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import StagnationError

ARMIJO_C = 1e-4
MAX_HALVINGS = 50
CURVATURE_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class BfgsState:
    """Inverse-Hessian approximation plus the last accepted secant pair.

    ``skipped`` is True when the most recent update was rejected by the
    curvature test and the matrix was left unchanged.
    """

    B: np.ndarray
    s: np.ndarray | None = None
    delta: np.ndarray | None = None
    skipped: bool = False

    @classmethod
    def identity(cls, n: int) -> "BfgsState":
        return cls(B=np.eye(n))


def bfgs_update(state: BfgsState, s, delta, curvature_floor: float = CURVATURE_FLOOR) -> BfgsState:
    """Apply one BFGS update for step ``s`` and gradient change ``delta``.

    B+ = (I - rho s d^T) B (I - rho d s^T) + rho s s^T,  rho = 1 / (s^T d)

    The update is skipped (``skipped=True``, ``B`` unchanged) unless
    ``s^T d > curvature_floor * |s| * |d|``.
    """
    s = np.asarray(s, dtype=float)
    d = np.asarray(delta, dtype=float)
    sd = float(s @ d)
    if not sd > curvature_floor * np.linalg.norm(s) * np.linalg.norm(d):
        return BfgsState(B=state.B, s=state.s, delta=state.delta, skipped=True)
    rho = 1.0 / sd
    Bd = state.B @ d
    # expanded form of the product above; avoids two n^3 matmuls
    B = (
        state.B
        - rho * (np.outer(s, Bd) + np.outer(Bd, s))
        + (rho * rho * float(d @ Bd) + rho) * np.outer(s, s)
    )
    B = 0.5 * (B + B.T)
    return BfgsState(B=B, s=s, delta=d, skipped=False)


def _initial_step(f0: float, f1: float, slope: float) -> float:
    # minimiser of the parabola through f(0), f'(0) and f(1)
    curv = f1 - f0 - slope
    if not np.isfinite(f1) or not curv > 0:
        return 1.0
    return float(np.clip(-slope / (2.0 * curv), 1e-3, 1e3))


def armijo_search(f, x, fx: float, g, p, c: float = ARMIJO_C, max_halvings: int = MAX_HALVINGS):
    """Backtracking line search along ``p``.

    The first trial step is the minimiser of the quadratic model fitted to
    ``f(x)``, the directional slope and ``f(x + p)``; the step is then halved
    until the Armijo condition ``f(x + t p) <= f(x) + c t g^T p`` holds.
    Returns ``(t, f(x + t p))``.
    """
    slope = float(g @ p)
    t = _initial_step(fx, f(x + p), slope)
    for _ in range(max_halvings + 1):
        ft = f(x + t * p)
        if np.isfinite(ft) and ft <= fx + c * t * slope:
            return t, ft
        t *= 0.5
    raise StagnationError(f"line search failed after {max_halvings} halvings")


@dataclass
class BfgsResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    state: BfgsState
    iterations: int
    converged: bool
    accepted_updates: int = 0
    skipped_updates: int = 0
    history: list = field(default_factory=list)


def bfgs_minimize(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0,
    tol: float = 1e-6,
    max_iters: int = 200,
    callback: Callable[[int, np.ndarray, BfgsState], None] | None = None,
) -> BfgsResult:
    """Minimise ``f`` from ``x0``; stops once ``|grad| < tol`` or after ``max_iters``.

    ``callback(k, x, state)`` is called after every iteration with the state
    produced by that iteration's update attempt.
    """
    x = np.array(x0, dtype=float)
    state = BfgsState.identity(x.size)
    fx = float(f(x))
    g = np.asarray(grad(x), dtype=float)
    k = accepted = skipped = 0
    history = [fx]
    while np.linalg.norm(g) >= tol and k < max_iters:
        p = -state.B @ g
        if not float(g @ p) < 0:
            # lost descent through round-off; restart from steepest descent
            state = BfgsState.identity(x.size)
            p = -g
        t, f_new = armijo_search(f, x, fx, g, p)
        s = t * p
        x_new = x + s
        g_new = np.asarray(grad(x_new), dtype=float)
        state = bfgs_update(state, s, g_new - g)
        if state.skipped:
            skipped += 1
        else:
            accepted += 1
        x, fx, g = x_new, f_new, g_new
        k += 1
        history.append(fx)
        if callback is not None:
            callback(k, x, state)
    return BfgsResult(
        x=x,
        fun=fx,
        grad=g,
        state=state,
        iterations=k,
        converged=bool(np.linalg.norm(g) < tol),
        accepted_updates=accepted,
        skipped_updates=skipped,
        history=history,
    )
