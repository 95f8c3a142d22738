"""Deliberately slow reference implementations that certify the fast path.

``global_optimum_row`` enumerates every trit-pair assignment of a short row
and solves the ridge problem for each, yielding the true global optimum of
the regularized objective. ``naive_reconstruct_error`` recomputes the
reconstruction error with plain Python loops, independent of the vectorized
code it cross-checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .trits import QuantizedLayer

MAX_ORACLE_LEN = 6

# Per-element enumeration order (0, -1, +1): zero first so that, on exact
# objective ties, the sparser assignment wins deterministically.
_DIGITS = (0, -1, 1)


@dataclass
class OracleResult:
    objective: float  # minimized quantity: ||w - S a||^2 + lambda ||a||^2
    squared_error: float  # raw ||w - S a||^2 at the minimizer
    t1: np.ndarray
    t2: np.ndarray
    alpha: np.ndarray
    enumeration_count: int


def regularized_objective(w, t1, t2, alpha, lam: float) -> float:
    """Objective value of one row assignment under regularization ``lam``."""
    w = np.asarray(w, dtype=np.float64)
    recon = float(alpha[0]) * np.asarray(t1, dtype=np.float64) + float(
        alpha[1]
    ) * np.asarray(t2, dtype=np.float64)
    err = float(np.sum((w - recon) ** 2))
    return err + lam * float(alpha[0] ** 2 + alpha[1] ** 2)


def global_optimum_row(w, lam: float) -> OracleResult:
    """Exhaustive global minimum of the regularized row objective.

    Enumerates all 9^d trit pairs (d <= 6), solving the closed-form ridge
    problem for each pair. Requires lam > 0 so every pair has a unique
    minimizer. The first assignment reaching the minimum in enumeration
    order is returned.
    """
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    d = w.shape[0]
    if d < 1 or d > MAX_ORACLE_LEN:
        raise ValueError(f"row length must be in [1, {MAX_ORACLE_LEN}], got {d}")
    if not lam > 0:
        raise ValueError("lambda must be positive for the exhaustive oracle")

    rows = np.array(list(itertools.product(_DIGITS, repeat=d)), dtype=np.float64)
    # Gram pieces for every (t1, t2) combination, t1-major.
    sumsq = (rows * rows).sum(axis=1)  # (3^d,)
    bt = rows @ w  # (3^d,)
    cross = rows @ rows.T  # (3^d, 3^d), s12 for each pair

    a11 = sumsq[:, None] + lam
    a22 = sumsq[None, :] + lam
    det = a11 * a22 - cross * cross
    alpha1 = (a22 * bt[:, None] - cross * bt[None, :]) / det
    alpha2 = (a11 * bt[None, :] - cross * bt[:, None]) / det

    wsq = float(w @ w)
    fit_err = (
        wsq
        - 2.0 * (alpha1 * bt[:, None] + alpha2 * bt[None, :])
        + alpha1 * alpha1 * sumsq[:, None]
        + 2.0 * alpha1 * alpha2 * cross
        + alpha2 * alpha2 * sumsq[None, :]
    )
    objective = fit_err + lam * (alpha1 * alpha1 + alpha2 * alpha2)

    flat = int(np.argmin(objective))
    i, j = divmod(flat, rows.shape[0])
    t1 = rows[i].astype(np.int8)
    t2 = rows[j].astype(np.int8)
    alpha = np.array([alpha1[i, j], alpha2[i, j]], dtype=np.float64)
    # Recompute the winner in plain arithmetic to shed any vectorized rounding.
    recon = alpha[0] * rows[i] + alpha[1] * rows[j]
    squared_error = float(np.sum((w - recon) ** 2))
    obj = squared_error + lam * float(alpha @ alpha)
    return OracleResult(
        objective=obj,
        squared_error=squared_error,
        t1=t1,
        t2=t2,
        alpha=alpha,
        enumeration_count=9**d,
    )


def naive_reconstruct_error(w, layer: QuantizedLayer) -> float:
    """Frobenius reconstruction error recomputed with an explicit element loop."""
    w = np.asarray(w, dtype=np.float64)
    layout = layer.layout
    if w.shape != (layout.n, layout.d):
        raise ValueError(f"matrix shape {w.shape} does not match layer {layer.shape}")
    total = 0.0
    for i in range(layout.n):
        for j in range(layout.d):
            g, c = layout.group_of(i, j)
            approx = layer.scale1[g] * int(layer.plane1[g, c]) + layer.scale2[g] * int(
                layer.plane2[g, c]
            )
            diff = w[i, j] - approx
            total += diff * diff
    return float(np.sqrt(total))
