"""Quantized data model: trit-planes, group layout, and 2-bit packing.

The packing layout defined here is normative for the on-disk format:
4 trits per byte, element ``j`` occupies bits ``2*(j % 4)`` and
``2*(j % 4) + 1`` of byte ``j // 4`` (least-significant bits first), with the
encoding 0 -> 00, +1 -> 01, -1 -> 10. Code 11 is reserved and never written;
the final partial byte is zero-padded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidTritCodeError, ShapeError
from .linalg import as_trits, as_weight_matrix

# code -> trit; index 3 is the reserved code
_DECODE = np.array([0, 1, -1, 2], dtype=np.int8)
# trit + 1 -> code
_ENCODE = np.array([0b10, 0b00, 0b01], dtype=np.uint8)


def pack_trits(trits) -> bytes:
    """Pack a trit sequence into bytes, 4 trits per byte."""
    t = as_trits(np.asarray(trits).reshape(-1))
    codes = _ENCODE[t + 1].astype(np.uint8)
    pad = (-len(codes)) % 4
    if pad:
        codes = np.concatenate([codes, np.zeros(pad, dtype=np.uint8)])
    quads = codes.reshape(-1, 4)
    packed = quads[:, 0] | (quads[:, 1] << 2) | (quads[:, 2] << 4) | (quads[:, 3] << 6)
    return packed.astype(np.uint8).tobytes()


def unpack_trits(data: bytes, count: int) -> np.ndarray:
    """Inverse of :func:`pack_trits`; returns ``count`` trits as int8.

    Raises InvalidTritCodeError if any of the first ``count`` slots holds the
    reserved code 0b11.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    raw = np.frombuffer(data, dtype=np.uint8)
    if raw.size * 4 < count:
        raise ShapeError(f"need {count} trits but buffer holds at most {raw.size * 4}")
    codes = np.empty((raw.size, 4), dtype=np.uint8)
    codes[:, 0] = raw & 0b11
    codes[:, 1] = (raw >> 2) & 0b11
    codes[:, 2] = (raw >> 4) & 0b11
    codes[:, 3] = (raw >> 6) & 0b11
    codes = codes.reshape(-1)[:count]
    if np.any(codes == 0b11):
        raise InvalidTritCodeError("reserved trit code 11 encountered")
    return _DECODE[codes]


def packed_size(count: int) -> int:
    """Bytes needed to pack ``count`` trits."""
    return (count + 3) // 4


@dataclass(frozen=True)
class GroupLayout:
    """How an n x d matrix maps onto grouped rows of width G.

    Each original row is chopped into ``groups_per_row`` contiguous column
    segments; segments never cross row boundaries. The trailing segment of a
    row may be shorter than G (``last_group_len``) and is zero-padded.
    """

    n: int
    d: int
    group_size: int
    groups_per_row: int = field(init=False)
    m: int = field(init=False)
    last_group_len: int = field(init=False)

    def __post_init__(self):
        if self.n < 1 or self.d < 1 or self.group_size < 1:
            raise ShapeError("layout dimensions must be positive")
        gpr = -(-self.d // self.group_size)
        object.__setattr__(self, "groups_per_row", gpr)
        object.__setattr__(self, "m", self.n * gpr)
        object.__setattr__(self, "last_group_len", self.d - (gpr - 1) * self.group_size)

    def padding_mask(self) -> np.ndarray:
        """Boolean (m, G) mask, True at zero-padded positions."""
        mask = np.zeros((self.m, self.group_size), dtype=bool)
        if self.last_group_len < self.group_size:
            last = np.arange(self.groups_per_row - 1, self.m, self.groups_per_row)
            mask[last, self.last_group_len:] = True
        return mask

    def group_of(self, i: int, j: int) -> tuple[int, int]:
        """Grouped coordinate (g, c) of original element (i, j)."""
        if not (0 <= i < self.n and 0 <= j < self.d):
            raise ShapeError(f"({i}, {j}) outside {self.n} x {self.d}")
        g = i * self.groups_per_row + j // self.group_size
        return g, j % self.group_size


def group_reshape(w, group_size: int) -> tuple[np.ndarray, GroupLayout]:
    """Reshape an n x d matrix into (m, G) grouped rows with zero padding."""
    w = as_weight_matrix(w)
    n, d = w.shape
    layout = GroupLayout(n, d, group_size)
    padded_d = layout.groups_per_row * layout.group_size
    buf = np.zeros((n, padded_d), dtype=np.float64)
    buf[:, :d] = w
    return buf.reshape(layout.m, layout.group_size), layout


def ungroup(grouped: np.ndarray, layout: GroupLayout) -> np.ndarray:
    """Inverse of :func:`group_reshape`, dropping padding columns."""
    grouped = np.asarray(grouped)
    if grouped.shape != (layout.m, layout.group_size):
        raise ShapeError(
            f"grouped shape {grouped.shape} does not match layout "
            f"({layout.m}, {layout.group_size})"
        )
    wide = grouped.reshape(layout.n, layout.groups_per_row * layout.group_size)
    return np.ascontiguousarray(wide[:, : layout.d])


def sparsity(plane: np.ndarray, layout: Optional[GroupLayout] = None) -> float:
    """Fraction of zero trits, excluding padding positions when a layout is given."""
    plane = np.asarray(plane)
    if layout is None:
        total = plane.size
        zeros = int(np.count_nonzero(plane == 0))
    else:
        if plane.shape != (layout.m, layout.group_size):
            raise ShapeError(f"plane shape {plane.shape} does not match layout")
        real = ~layout.padding_mask()
        total = int(real.sum())
        zeros = int(np.count_nonzero(plane[real] == 0))
    return zeros / total


@dataclass
class LayerMeta:
    """Convergence bookkeeping attached to a quantized layer.

    Layers restored from disk only carry the fields the file format stores;
    the rest are None.
    """

    iterations: int
    final_error: float
    max_delta_alpha: Optional[float] = None
    converged: Optional[bool] = None
    config: Optional[dict] = None


@dataclass
class QuantizedLayer:
    """Complete two-plane ternary decomposition of one weight matrix."""

    layout: GroupLayout
    plane1: np.ndarray  # int8, (m, G)
    plane2: np.ndarray
    scale1: np.ndarray  # float64, (m,)
    scale2: np.ndarray
    meta: LayerMeta

    def __post_init__(self):
        shape = (self.layout.m, self.layout.group_size)
        for name in ("plane1", "plane2"):
            plane = as_trits(getattr(self, name))
            if plane.shape != shape:
                raise ShapeError(f"{name} shape {plane.shape} != grouped shape {shape}")
            setattr(self, name, plane)
        for name in ("scale1", "scale2"):
            vec = np.asarray(getattr(self, name), dtype=np.float64)
            if vec.shape != (self.layout.m,):
                raise ShapeError(f"{name} must have one value per grouped row")
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"{name} contains non-finite values")
            setattr(self, name, vec)
        pad = self.layout.padding_mask()
        if np.any(self.plane1[pad]) or np.any(self.plane2[pad]):
            raise ValueError("padding positions must hold the 0 trit")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.layout.n, self.layout.d)
