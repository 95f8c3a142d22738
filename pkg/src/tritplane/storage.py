"""Bit-exact file formats and memory-footprint calculators.

Both containers are little-endian throughout.

FPT1 (dense tensor)::

    offset  size  field
    0       4     magic b"FPT1"
    4       4     version u32 = 1
    8       1     dtype u8: 0 = float32, 1 = float16
    9       1     rank u8 = 2
    10      8     n u64
    18      8     d u64
    26      ...   payload, row-major

PTQ1 (quantized layer)::

    offset  size  field
    0       4     magic b"PTQ1"
    4       4     version u32 = 1
    8       4     n u32
    12      4     d u32
    16      4     G u32
    20      4     iterations_used u32
    24      8     final_error f64
    32      ...   plane1 packed, ceil(m*G/4) bytes   (m = n * ceil(d/G))
            ...   plane2 packed, same size
            ...   scale1, m float16 values
            ...   scale2, m float16 values

Scales are serialized as float16 (round-to-nearest-even) but held as float64
in memory; version 1 pins this, and the version field reserves room for a
future full-precision variant. Total stream length must match the header
exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import CorruptDataError, CorruptHeaderError, ShapeError, TruncatedPayloadError
from .trits import (
    GroupLayout,
    LayerMeta,
    QuantizedLayer,
    pack_trits,
    packed_size,
    unpack_trits,
)

FPT_MAGIC = b"FPT1"
PTQ_MAGIC = b"PTQ1"
_FPT_HEADER = struct.Struct("<4sIBBQQ")
_PTQ_HEADER = struct.Struct("<4sIIIIId")

_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f2")}
_DTYPE_NAMES = {"f32": 0, "f16": 1}


def tensor_to_bytes(w, dtype: str = "f32") -> bytes:
    """Serialize a 2-D matrix as an FPT1 stream."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2:
        raise ShapeError(f"FPT1 stores rank-2 tensors, got ndim={w.ndim}")
    if dtype not in _DTYPE_NAMES:
        raise ValueError(f"unknown dtype {dtype!r}, expected one of {sorted(_DTYPE_NAMES)}")
    code = _DTYPE_NAMES[dtype]
    n, d = w.shape
    header = _FPT_HEADER.pack(FPT_MAGIC, 1, code, 2, n, d)
    return header + np.ascontiguousarray(w.astype(_DTYPE_CODES[code])).tobytes()


def tensor_from_bytes(buf: bytes) -> np.ndarray:
    """Parse an FPT1 stream into a float64 matrix."""
    if len(buf) < _FPT_HEADER.size:
        raise TruncatedPayloadError("FPT1 stream shorter than its header")
    magic, version, code, rank, n, d = _FPT_HEADER.unpack_from(buf)
    if magic != FPT_MAGIC:
        raise CorruptHeaderError(f"bad magic {magic!r}")
    if version != 1:
        raise CorruptHeaderError(f"unsupported FPT1 version {version}")
    if code not in _DTYPE_CODES:
        raise CorruptHeaderError(f"unknown dtype code {code}")
    if rank != 2 or n < 1 or d < 1:
        raise CorruptHeaderError(f"bad shape fields rank={rank} n={n} d={d}")
    dt = _DTYPE_CODES[code]
    expected = _FPT_HEADER.size + n * d * dt.itemsize
    if len(buf) != expected:
        raise TruncatedPayloadError(f"FPT1 stream is {len(buf)} bytes, expected {expected}")
    payload = np.frombuffer(buf, dtype=dt, offset=_FPT_HEADER.size)
    return payload.astype(np.float64).reshape(n, d)


def save_tensor(path, w, dtype: str = "f32") -> None:
    with open(path, "wb") as fh:
        fh.write(tensor_to_bytes(w, dtype))


def load_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return tensor_from_bytes(fh.read())


def round_scales_fp16(layer: QuantizedLayer) -> QuantizedLayer:
    """Copy of ``layer`` with scales passed through the on-disk float16 rounding."""
    return QuantizedLayer(
        layout=layer.layout,
        plane1=layer.plane1,
        plane2=layer.plane2,
        scale1=layer.scale1.astype(np.float16).astype(np.float64),
        scale2=layer.scale2.astype(np.float16).astype(np.float64),
        meta=layer.meta,
    )


def write_quantized(layer: QuantizedLayer) -> bytes:
    """Serialize a quantized layer as a PTQ1 stream."""
    layout = layer.layout
    header = _PTQ_HEADER.pack(
        PTQ_MAGIC,
        1,
        layout.n,
        layout.d,
        layout.group_size,
        layer.meta.iterations,
        layer.meta.final_error,
    )
    parts = [
        header,
        pack_trits(layer.plane1),
        pack_trits(layer.plane2),
        layer.scale1.astype("<f2").tobytes(),
        layer.scale2.astype("<f2").tobytes(),
    ]
    return b"".join(parts)


def read_quantized(buf: bytes) -> QuantizedLayer:
    """Parse a PTQ1 stream; scales come back float16-rounded."""
    if len(buf) < _PTQ_HEADER.size:
        raise TruncatedPayloadError("PTQ1 stream shorter than its header")
    magic, version, n, d, g, iterations, final_error = _PTQ_HEADER.unpack_from(buf)
    if magic != PTQ_MAGIC:
        raise CorruptHeaderError(f"bad magic {magic!r}")
    if version != 1:
        raise CorruptHeaderError(f"unsupported PTQ1 version {version}")
    if n < 1 or d < 1 or g < 1:
        raise CorruptHeaderError(f"bad shape fields n={n} d={d} G={g}")
    layout = GroupLayout(n, d, g)
    count = layout.m * layout.group_size
    plane_bytes = packed_size(count)
    scale_bytes = 2 * layout.m
    expected = _PTQ_HEADER.size + 2 * plane_bytes + 2 * scale_bytes
    if len(buf) != expected:
        raise TruncatedPayloadError(f"PTQ1 stream is {len(buf)} bytes, expected {expected}")

    off = _PTQ_HEADER.size
    plane1 = unpack_trits(buf[off : off + plane_bytes], count).reshape(layout.m, g)
    off += plane_bytes
    plane2 = unpack_trits(buf[off : off + plane_bytes], count).reshape(layout.m, g)
    off += plane_bytes
    scale1 = np.frombuffer(buf, dtype="<f2", count=layout.m, offset=off).astype(np.float64)
    off += scale_bytes
    scale2 = np.frombuffer(buf, dtype="<f2", count=layout.m, offset=off).astype(np.float64)
    try:
        return QuantizedLayer(
            layout=layout,
            plane1=plane1,
            plane2=plane2,
            scale1=scale1,
            scale2=scale2,
            meta=LayerMeta(iterations=iterations, final_error=final_error),
        )
    except ValueError as exc:
        # nonzero padding trits or non-finite scales
        raise CorruptDataError(f"PTQ1 payload violates layer invariants: {exc}") from exc


def save_quantized(path, layer: QuantizedLayer) -> None:
    with open(path, "wb") as fh:
        fh.write(write_quantized(layer))


def load_quantized(path) -> QuantizedLayer:
    with open(path, "rb") as fh:
        return read_quantized(fh.read())


# ---------------------------------------------------------------------------
# Memory accounting. All calculators return exact integer bit counts;
# group counts use ceiling division.
# ---------------------------------------------------------------------------


def _groups(d: int, k: int) -> int:
    if d < 1 or k < 1:
        raise ValueError("dimensions must be positive")
    return -(-d // k)


def fp16_memory_bits(n: int, d: int) -> int:
    return 16 * n * d


def tritplanes_memory_bits(n: int, d: int) -> int:
    """Bits for the two 2-bit trit-planes alone (no scales)."""
    return 2 * n * d * 2


def ptqtp_memory_bits(n: int, d: int, k: int) -> int:
    """Two 2-bit trit-planes plus two float16 scale vectors per group."""
    return 2 * n * d * 2 + _groups(d, k) * 2 * n * 16


def _check_salient(d: int, c: int) -> None:
    if not 0 <= c <= d:
        raise ValueError(f"salient column count c={c} outside [0, {d}]")


def billm_memory_bits(n: int, d: int, k: int, c: int) -> int:
    _check_salient(d, c)
    second_order = 2 * n * c + _groups(d, k) * 3 * n * 16
    first_order = n * (d - c) + _groups(d, k) * 2 * n * 16 * 2
    return second_order + first_order + n * d + d


def arbrc_memory_bits(n: int, d: int, k: int, c: int) -> int:
    _check_salient(d, c)
    second_order = 2 * n * c + (_groups(d, k) * 2 * n + 2 * c) * 16
    first_order = n * (d - c) + (_groups(d, k) * n + (d - c)) * 16 * 2
    return second_order + first_order + n * d + d


def arbrc_cgb_memory_bits(n: int, d: int, k: int, c: int) -> int:
    _check_salient(d, c)
    second_order = 2 * n * c + (_groups(d, k) * 2 * n + 2 * c) * 16 * 2
    first_order = n * (d - c) + (_groups(d, k) * n + (d - c)) * 16 * 2
    return second_order + first_order + n * d + d


@dataclass(frozen=True)
class MemoryModel:
    """Exact per-method bit totals for one n x d matrix at group size k.

    ``c`` (salient column count) only affects the binarization baselines.
    """

    n: int
    d: int
    k: int
    c: int = 0

    def totals(self) -> dict:
        return {
            "fp16": fp16_memory_bits(self.n, self.d),
            "tritplanes": tritplanes_memory_bits(self.n, self.d),
            "ptqtp": ptqtp_memory_bits(self.n, self.d, self.k),
            "billm": billm_memory_bits(self.n, self.d, self.k, self.c),
            "arb_rc": arbrc_memory_bits(self.n, self.d, self.k, self.c),
            "arb_rc_cgb": arbrc_cgb_memory_bits(self.n, self.d, self.k, self.c),
        }


@dataclass(frozen=True)
class LayerShape:
    """One matrix in a model manifest; ``quantized=False`` marks embeddings
    and other tensors that stay at 16 bits under every method."""

    n: int
    d: int
    quantized: bool = True


MEMORY_METHODS = ("fp16", "ptqtp", "ptqtp-grouped")


def model_memory_report(
    shapes: list[LayerShape], method: str, group_size: int = 128
) -> float:
    """Total model size in gigabytes (1e9 bytes) under the given method.

    ``ptqtp`` uses one scale group per row (k = d); ``ptqtp-grouped`` uses
    ``group_size`` columns per group. Unquantized shapes are counted at
    16 bits per parameter throughout.
    """
    if method not in MEMORY_METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {MEMORY_METHODS}")
    total_bits = 0
    for shape in shapes:
        if not shape.quantized or method == "fp16":
            total_bits += fp16_memory_bits(shape.n, shape.d)
        elif method == "ptqtp":
            total_bits += ptqtp_memory_bits(shape.n, shape.d, shape.d)
        else:
            total_bits += ptqtp_memory_bits(shape.n, shape.d, group_size)
    return total_bits / 8 / 1e9


def llama_7b_shapes() -> list[LayerShape]:
    """Linear-layer manifest of a 7B-class decoder (32 blocks, hidden 4096,
    intermediate 11008, vocab 32000). One vocab projection is counted once,
    unquantized, matching weight-tied accounting."""
    shapes = []
    for _ in range(32):
        shapes += [LayerShape(4096, 4096)] * 4
        shapes += [LayerShape(4096, 11008)] * 3
    shapes.append(LayerShape(32000, 4096, quantized=False))
    return shapes


def llama_13b_shapes() -> list[LayerShape]:
    """Same structure at 13B scale: 40 blocks, hidden 5120, intermediate 13824."""
    shapes = []
    for _ in range(40):
        shapes += [LayerShape(5120, 5120)] * 4
        shapes += [LayerShape(5120, 13824)] * 3
    shapes.append(LayerShape(32000, 5120, quantized=False))
    return shapes


def compression_ratio(n: int, d: int, k: int) -> float:
    """FP16 bits over quantized bits for one n x d matrix at group size k."""
    return fp16_memory_bits(n, d) / ptqtp_memory_bits(n, d, k)
