"""Alternating two-trit-plane decomposition with adaptive ridge regularization.

A weight matrix is reshaped into grouped rows of width G, and each grouped row
is approximated as ``alpha1 * t1 + alpha2 * t2`` with trit rows t1, t2 in
{-1, 0, +1}^G. The fit alternates between a closed-form 2x2 ridge solve for
the scale pair (with per-row lambda escalated whenever the Frobenius condition
estimate of the normal matrix crosses a threshold) and an exhaustive 9-candidate
per-element refinement of the trit pair. Iteration stops when the largest
per-row scale movement drops below the tolerance, when the reconstruction is
exact, or at the iteration cap.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_weight_matrix
from .trits import GroupLayout, LayerMeta, QuantizedLayer, group_reshape, ungroup

# All 9 trit pairs, ordered by |c1|+|c2| then lexicographically with -1 < 0 < 1.
# argmin over this order implements the tie-break policy: prefer sparser pairs,
# then the lexicographically smaller one.
_CAND1 = np.array([0, -1, 0, 0, 1, -1, -1, 1, 1], dtype=np.int8)
_CAND2 = np.array([0, 0, -1, 1, 0, -1, 1, -1, 1], dtype=np.int8)


@dataclass(frozen=True)
class DecomposeConfig:
    """Tunables of the alternating decomposition."""

    group_size: int = 128
    max_iterations: int = 50
    tolerance: float = 1e-4
    lambda_init: float = 1e-8
    lambda_max: float = 1.0
    condition_threshold: float = 1e12
    final_refit: bool = False

    def __post_init__(self):
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not 0 < self.lambda_init <= self.lambda_max:
            raise ValueError("need 0 < lambda_init <= lambda_max")
        if not self.condition_threshold > 0:
            raise ValueError("condition_threshold must be > 0")


@dataclass
class IterationRecord:
    iteration: int
    error_after_scale_step: float
    error_after_trit_step: float
    max_delta_alpha: float
    escalated_rows: int


@dataclass
class IterationTrace:
    """Per-iteration progress of one decomposition run."""

    records: list[IterationRecord] = field(default_factory=list)
    final_error: float = 0.0
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.records)


def adapt_lambda(lam: float, kappa: float, cfg: DecomposeConfig) -> float:
    """Escalate lambda when the condition estimate crosses the threshold.

    Below the threshold lambda is returned unchanged; above it, it grows by
    sqrt(kappa / threshold) and clamps at lambda_max. Lambda never decreases.
    """
    if kappa < cfg.condition_threshold:
        return lam
    return min(lam * float(np.sqrt(kappa / cfg.condition_threshold)), cfg.lambda_max)


def init_planes(
    grouped: np.ndarray, layout: GroupLayout
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sign-based starting point: both planes sign(w) with 0 -> +1, scales (1, 1).

    Padding positions get the 0 trit instead.
    """
    grouped = np.asarray(grouped, dtype=np.float64)
    if grouped.shape != (layout.m, layout.group_size):
        raise ValueError(f"grouped shape {grouped.shape} does not match layout")
    if not np.all(np.isfinite(grouped)):
        raise ValueError("grouped matrix contains non-finite values")
    t = np.where(grouped < 0, -1, 1).astype(np.int8)
    t[layout.padding_mask()] = 0
    alpha = np.ones((layout.m, 2), dtype=np.float64)
    return t, t.copy(), alpha


def update_trits_row(w, alpha, valid: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Exhaustive 9-candidate trit refinement of a single grouped row.

    For each element the pair (c1, c2) minimizing (w_j - a1*c1 - a2*c2)^2 is
    chosen; ties prefer the smaller |c1|+|c2|, then lexicographic order with
    -1 < 0 < 1. Positions at index >= ``valid`` are padding and forced to (0, 0).
    """
    w = np.asarray(w, dtype=np.float64)
    a1, a2 = float(alpha[0]), float(alpha[1])
    if not (np.isfinite(a1) and np.isfinite(a2)):
        raise ValueError("alpha must be finite")
    values = a1 * _CAND1.astype(np.float64) + a2 * _CAND2.astype(np.float64)
    err = (w[:, None] - values[None, :]) ** 2
    idx = err.argmin(axis=1)
    if valid is not None:
        idx[valid:] = 0
    return _CAND1[idx], _CAND2[idx]


def _scale_step(grouped, t1, t2, lam, cfg):
    """Vectorized per-row ridge solve with in-iteration lambda escalation.

    Mirrors linalg.solve_ridge / condition_estimate row by row: build the
    normal matrix with the current lambda, estimate its condition, escalate
    lambda where needed, rebuild, then solve through the adjugate.
    """
    t1f = t1.astype(np.float64)
    t2f = t2.astype(np.float64)
    s11 = (t1f * t1f).sum(axis=1)
    s22 = (t2f * t2f).sum(axis=1)
    s12 = (t1f * t2f).sum(axis=1)
    b1 = (t1f * grouped).sum(axis=1)
    b2 = (t2f * grouped).sum(axis=1)

    a11 = s11 + lam
    a22 = s22 + lam
    det = a11 * a22 - s12 * s12
    kappa = (a11 * a11 + 2.0 * (s12 * s12) + a22 * a22) / np.abs(det)

    hot = kappa >= cfg.condition_threshold
    lam_new = np.where(
        hot,
        np.minimum(lam * np.sqrt(kappa / cfg.condition_threshold), cfg.lambda_max),
        lam,
    )
    if hot.any():
        a11 = s11 + lam_new
        a22 = s22 + lam_new
        det = a11 * a22 - s12 * s12

    alpha = np.empty((grouped.shape[0], 2), dtype=np.float64)
    alpha[:, 0] = (a22 * b1 - s12 * b2) / det
    alpha[:, 1] = (a11 * b2 - s12 * b1) / det
    return alpha, lam_new, int(hot.sum())


def _trit_step(grouped, alpha, pad_mask):
    values = alpha[:, 0:1] * _CAND1[None, :] + alpha[:, 1:2] * _CAND2[None, :]
    err = (grouped[:, :, None] - values[:, None, :]) ** 2
    idx = err.argmin(axis=2)
    idx[pad_mask] = 0
    return _CAND1[idx], _CAND2[idx]


def _error_sq(grouped, t1, t2, alpha) -> float:
    recon = alpha[:, 0:1] * t1 + alpha[:, 1:2] * t2
    diff = grouped - recon
    return float(np.sum(diff * diff))


def decompose(w, cfg: DecomposeConfig = DecomposeConfig()) -> tuple[QuantizedLayer, IterationTrace]:
    """Quantize a dense matrix into two trit-planes plus per-group scales.

    Returns the assembled layer and the iteration trace. The result is a pure
    function of (w, cfg): identical inputs give bit-identical outputs.
    """
    w = as_weight_matrix(w)
    grouped, layout = group_reshape(w, cfg.group_size)
    pad_mask = layout.padding_mask()
    t1, t2, alpha = init_planes(grouped, layout)
    lam = np.full(layout.m, cfg.lambda_init, dtype=np.float64)

    trace = IterationTrace()
    for it in range(1, cfg.max_iterations + 1):
        alpha_new, lam, escalated = _scale_step(grouped, t1, t2, lam, cfg)
        err_alpha = _error_sq(grouped, t1, t2, alpha_new)
        t1, t2 = _trit_step(grouped, alpha_new, pad_mask)
        err_trit = _error_sq(grouped, t1, t2, alpha_new)
        max_delta = float(np.sqrt(((alpha_new - alpha) ** 2).sum(axis=1)).max())
        alpha = alpha_new
        trace.records.append(
            IterationRecord(
                iteration=it,
                error_after_scale_step=float(np.sqrt(err_alpha)),
                error_after_trit_step=float(np.sqrt(err_trit)),
                max_delta_alpha=max_delta,
                escalated_rows=escalated,
            )
        )
        # The tolerance compares consecutive ridge outputs, so it first
        # applies at iteration 2: the init scales (1, 1) are an arbitrary
        # constant, and rows whose first solve lands near (1, 1) would
        # otherwise stop before the scales ever adapt to the new planes.
        if err_trit == 0.0 or (it > 1 and max_delta < cfg.tolerance):
            trace.converged = True
            break

    if cfg.final_refit:
        alpha, lam, _ = _scale_step(grouped, t1, t2, lam, cfg)
        err_trit = _error_sq(grouped, t1, t2, alpha)

    final_error = float(np.sqrt(err_trit))
    trace.final_error = final_error
    meta = LayerMeta(
        iterations=trace.iterations,
        final_error=final_error,
        max_delta_alpha=trace.records[-1].max_delta_alpha,
        converged=trace.converged,
        config=dataclasses.asdict(cfg),
    )
    layer = QuantizedLayer(
        layout=layout,
        plane1=t1,
        plane2=t2,
        scale1=alpha[:, 0].copy(),
        scale2=alpha[:, 1].copy(),
        meta=meta,
    )
    return layer, trace


def reconstruct(layer: QuantizedLayer) -> np.ndarray:
    """Dense n x d reconstruction ``alpha1*T1 + alpha2*T2``, un-grouped."""
    grouped = (
        layer.scale1[:, None] * layer.plane1 + layer.scale2[:, None] * layer.plane2
    )
    return ungroup(grouped, layer.layout)
