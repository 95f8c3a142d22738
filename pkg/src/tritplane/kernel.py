"""Multiplication-free forward computation with quantized layers.

Inner loops touch activations only through selection, addition, and
subtraction; the sole scalar multiplies are the two per-group scale
applications, which a census counter can verify.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .decompose import reconstruct
from .errors import ShapeError
from .trits import (
    GroupLayout,
    LayerMeta,
    QuantizedLayer,
    sparsity,
    unpack_trits,
)


@dataclass
class MultiplyCensus:
    """Counts scalar multiplications performed by the reference kernel."""

    count: int = field(default=0)

    def add(self, n: int) -> None:
        self.count += n


def ternary_dot(t, x) -> float:
    """Sum of x_j over t_j == +1 minus the sum over t_j == -1.

    Equals t . x but the element loop performs no multiplications.
    """
    t = np.asarray(t)
    x = np.asarray(x, dtype=np.float64)
    if t.shape != x.shape or t.ndim != 1:
        raise ShapeError(f"length mismatch: {t.shape} vs {x.shape}")
    return float(x[t == 1].sum() - x[t == -1].sum())


def _segment_activations(x: np.ndarray, layout: GroupLayout) -> np.ndarray:
    """Chop x into per-group segments (groups_per_row, G), zero padded."""
    buf = np.zeros(layout.groups_per_row * layout.group_size, dtype=np.float64)
    buf[: layout.d] = x
    return buf.reshape(layout.groups_per_row, layout.group_size)


def _forward_vector(layer: QuantizedLayer, x: np.ndarray, census) -> np.ndarray:
    layout = layer.layout
    seg = _segment_activations(x, layout)
    shape = (layout.n, layout.groups_per_row, layout.group_size)
    t1 = layer.plane1.reshape(shape)
    t2 = layer.plane2.reshape(shape)
    # Additive accumulation: select, then sum in index order per group.
    acc1 = np.where(t1 == 1, seg[None], 0.0).sum(axis=2) - np.where(
        t1 == -1, seg[None], 0.0
    ).sum(axis=2)
    acc2 = np.where(t2 == 1, seg[None], 0.0).sum(axis=2) - np.where(
        t2 == -1, seg[None], 0.0
    ).sum(axis=2)
    a1 = layer.scale1.reshape(layout.n, layout.groups_per_row)
    a2 = layer.scale2.reshape(layout.n, layout.groups_per_row)
    partials = a1 * acc1 + a2 * acc2
    if census is not None:
        census.add(2 * layout.m)
    # Group partials are summed in row order.
    return partials.sum(axis=1)


def forward(layer: QuantizedLayer, x, census: MultiplyCensus | None = None) -> np.ndarray:
    """y = W_hat @ x computed directly from the trit-planes.

    ``x`` may be a length-d vector or a d x batch matrix (columns are
    independent activations). Agrees with ``reconstruct(layer) @ x`` up to
    accumulation-order rounding.
    """
    x = np.asarray(x, dtype=np.float64)
    d = layer.layout.d
    if x.ndim == 1:
        if x.shape[0] != d:
            raise ShapeError(f"activation length {x.shape[0]} != d = {d}")
        return _forward_vector(layer, x, census)
    if x.ndim == 2:
        if x.shape[0] != d:
            raise ShapeError(f"activation rows {x.shape[0]} != d = {d}")
        cols = [_forward_vector(layer, x[:, b], census) for b in range(x.shape[1])]
        return np.stack(cols, axis=1)
    raise ShapeError(f"activations must be 1-D or 2-D, got ndim={x.ndim}")


def forward_packed(
    layout: GroupLayout,
    packed1: bytes,
    packed2: bytes,
    scale1,
    scale2,
    x,
    census: MultiplyCensus | None = None,
) -> np.ndarray:
    """Same contract as :func:`forward`, decoding trits from packed bytes."""
    count = layout.m * layout.group_size
    plane1 = unpack_trits(packed1, count).reshape(layout.m, layout.group_size)
    plane2 = unpack_trits(packed2, count).reshape(layout.m, layout.group_size)
    layer = QuantizedLayer(
        layout=layout,
        plane1=plane1,
        plane2=plane2,
        scale1=np.asarray(scale1, dtype=np.float64),
        scale2=np.asarray(scale2, dtype=np.float64),
        meta=LayerMeta(iterations=0, final_error=0.0),
    )
    return forward(layer, x, census)


def random_layer(n: int, d: int, group_size: int, rng: np.random.Generator) -> QuantizedLayer:
    """Random trit-planes and scales over the (n, d, G) layout, for benchmarks."""
    layout = GroupLayout(n, d, group_size)
    shape = (layout.m, layout.group_size)
    plane1 = rng.integers(-1, 2, size=shape).astype(np.int8)
    plane2 = rng.integers(-1, 2, size=shape).astype(np.int8)
    pad = layout.padding_mask()
    plane1[pad] = 0
    plane2[pad] = 0
    return QuantizedLayer(
        layout=layout,
        plane1=plane1,
        plane2=plane2,
        scale1=rng.standard_normal(layout.m),
        scale2=rng.standard_normal(layout.m),
        meta=LayerMeta(iterations=0, final_error=0.0),
    )


def bench_matvec(n: int, d: int, group_size: int, repetitions: int, seed: int = 0) -> dict:
    """Time the ternary matvec against a dense float64 baseline.

    Returns a JSON-ready report; ``ratio`` is ns_ternary / ns_dense. The two
    paths are cross-checked to 1e-5 relative before timing. No claim is made
    about which path is faster.
    """
    if n < 1 or d < 1 or group_size < 1:
        raise ValueError("sizes must be >= 1")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")

    rng = np.random.default_rng(seed)
    layer = random_layer(n, d, group_size, rng)
    x = rng.standard_normal(d)
    dense = reconstruct(layer)

    y_ternary = forward(layer, x)
    y_dense = dense @ x
    scale = max(float(np.linalg.norm(y_dense)), 1e-30)
    rel = float(np.linalg.norm(y_ternary - y_dense)) / scale
    if rel > 1e-5:
        raise ArithmeticError(f"kernel disagrees with dense baseline: rel={rel:.3e}")

    def time_ns(fn) -> float:
        fn()  # warm up
        t0 = time.perf_counter_ns()
        for _ in range(repetitions):
            fn()
        return (time.perf_counter_ns() - t0) / repetitions

    ns_dense = time_ns(lambda: dense @ x)
    ns_ternary = time_ns(lambda: forward(layer, x))
    return {
        "n": n,
        "d": d,
        "G": group_size,
        "reps": repetitions,
        "ns_dense": ns_dense,
        "ns_ternary": ns_ternary,
        "ratio": ns_ternary / ns_dense,
        "sparsity1": sparsity(layer.plane1, layer.layout),
        "sparsity2": sparsity(layer.plane2, layer.layout),
    }
