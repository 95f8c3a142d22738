"""Small dense linear algebra used by the ternary decomposer.

Everything here operates on plain numpy arrays in double precision. The only
solver is the closed-form 2x2 ridge system; there is intentionally no general
LU/QR path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ShapeError, SingularSystemError

TRIT_VALUES = (-1, 0, 1)


def as_weight_matrix(w) -> np.ndarray:
    """Validate and return ``w`` as a finite 2-D float64 matrix."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weight matrix contains NaN or Inf")
    return w


def frobenius_error_sq(w, w_hat) -> float:
    """Squared Frobenius norm of ``w - w_hat``."""
    w = np.asarray(w, dtype=np.float64)
    w_hat = np.asarray(w_hat, dtype=np.float64)
    if w.shape != w_hat.shape:
        raise ShapeError(f"shape mismatch: {w.shape} vs {w_hat.shape}")
    diff = w - w_hat
    return float(np.sum(diff * diff))


def frobenius_error(w, w_hat) -> float:
    """Frobenius norm of ``w - w_hat``."""
    return float(np.sqrt(frobenius_error_sq(w, w_hat)))


def as_trits(t) -> np.ndarray:
    """Validate a trit sequence; returns an int8 array."""
    t = np.asarray(t)
    if t.size and not np.isin(t, TRIT_VALUES).all():
        bad = t[~np.isin(t, TRIT_VALUES)][0]
        raise ValueError(f"trit value out of range: {bad!r}")
    return t.astype(np.int8)


def build_basis(t1, t2) -> np.ndarray:
    """Stack two trit rows into the d x 2 basis matrix (columns t1, t2)."""
    t1 = as_trits(t1)
    t2 = as_trits(t2)
    if t1.ndim != 1 or t2.ndim != 1 or t1.shape != t2.shape:
        raise ShapeError(f"basis columns must be equal-length vectors, got {t1.shape} and {t2.shape}")
    return np.stack([t1, t2], axis=1)


@dataclass
class RidgeSystem:
    """The 2x2 normal system (S^T S + lam*I) theta = S^T w of one row fit.

    ``a`` is symmetric with both diagonal entries >= lam; ``theta`` is filled
    by :meth:`solve`.
    """

    a: np.ndarray  # (2, 2)
    b: np.ndarray  # (2,)
    lam: float
    theta: Optional[np.ndarray] = None

    @classmethod
    def from_basis(cls, basis: np.ndarray, w, lam: float) -> "RidgeSystem":
        basis = np.asarray(basis)
        w = np.asarray(w, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[1] != 2:
            raise ShapeError(f"basis must be d x 2, got {basis.shape}")
        if w.ndim != 1 or w.shape[0] != basis.shape[0]:
            raise ShapeError(f"target length {w.shape} does not match basis {basis.shape}")
        if lam < 0:
            raise ValueError("lambda must be non-negative")
        s = basis.astype(np.float64)
        a11 = float(s[:, 0] @ s[:, 0]) + lam
        a22 = float(s[:, 1] @ s[:, 1]) + lam
        a12 = float(s[:, 0] @ s[:, 1])
        a = np.array([[a11, a12], [a12, a22]], dtype=np.float64)
        b = np.array([float(s[:, 0] @ w), float(s[:, 1] @ w)], dtype=np.float64)
        return cls(a=a, b=b, lam=lam)

    def condition(self) -> float:
        return condition_estimate(self.a)

    def solve(self) -> np.ndarray:
        """theta = A^-1 b via the adjugate inverse; caches the result."""
        det = self.a[0, 0] * self.a[1, 1] - self.a[0, 1] * self.a[1, 0]
        if det == 0.0:
            raise SingularSystemError(
                "2x2 normal matrix is exactly singular; raise lambda above zero"
            )
        theta1 = (self.a[1, 1] * self.b[0] - self.a[0, 1] * self.b[1]) / det
        theta2 = (self.a[0, 0] * self.b[1] - self.a[0, 1] * self.b[0]) / det
        self.theta = np.array([theta1, theta2], dtype=np.float64)
        return self.theta


def solve_ridge(basis: np.ndarray, w, lam: float) -> np.ndarray:
    """Closed-form solution of the 2-column ridge problem.

    Returns alpha = (S^T S + lam*I)^-1 S^T w through the explicit adjugate
    inverse of the 2x2 normal matrix. With lam > 0 the system is always
    solvable; lam == 0 with linearly dependent columns raises
    SingularSystemError.
    """
    return RidgeSystem.from_basis(basis, w, lam).solve()


def condition_estimate(a: np.ndarray) -> float:
    """Frobenius condition number ||A||_F * ||A^-1||_F of a 2x2 matrix.

    For 2x2 matrices the adjugate has the same Frobenius norm as A, so the
    estimate reduces to ||A||_F^2 / |det(A)|. The value is >= 2 for every
    invertible input and upper-bounds the spectral condition number.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (2, 2):
        raise ShapeError(f"expected a 2x2 matrix, got {a.shape}")
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if det == 0.0:
        raise SingularSystemError("matrix is exactly singular")
    norm_sq = float(a[0, 0] ** 2 + a[0, 1] ** 2 + a[1, 0] ** 2 + a[1, 1] ** 2)
    return norm_sq / abs(det)


def basis_singular_values(basis: np.ndarray) -> tuple[float, float]:
    """(sigma_max, sigma_min) of a d x 2 basis via its 2x2 Gram eigenvalues."""
    s = np.asarray(basis, dtype=np.float64)
    g11 = float(s[:, 0] @ s[:, 0])
    g22 = float(s[:, 1] @ s[:, 1])
    g12 = float(s[:, 0] @ s[:, 1])
    mean = 0.5 * (g11 + g22)
    half_gap = np.hypot(0.5 * (g11 - g22), g12)
    hi = max(mean + half_gap, 0.0)
    lo = max(mean - half_gap, 0.0)
    return float(np.sqrt(hi)), float(np.sqrt(lo))
