"""Ternary trit-plane quantization for dense weight matrices.

Decomposes a real matrix into two {-1, 0, +1} planes plus per-group scale
pairs via alternating ridge/trit optimization, stores the result in a
bit-exact 2-bit packed format, and evaluates it with a multiplication-free
kernel, exhaustive oracles, and memory-footprint calculators.
"""

from .decompose import (
    DecomposeConfig,
    IterationRecord,
    IterationTrace,
    adapt_lambda,
    decompose,
    init_planes,
    reconstruct,
    update_trits_row,
)
from .errors import (
    CorruptDataError,
    CorruptHeaderError,
    InvalidTritCodeError,
    ShapeError,
    SingularSystemError,
    TritplaneError,
    TruncatedPayloadError,
)
from .kernel import MultiplyCensus, bench_matvec, forward, forward_packed, ternary_dot
from .linalg import (
    RidgeSystem,
    build_basis,
    condition_estimate,
    frobenius_error,
    frobenius_error_sq,
    solve_ridge,
)
from .oracle import OracleResult, global_optimum_row, naive_reconstruct_error
from .storage import (
    LayerShape,
    MemoryModel,
    arbrc_cgb_memory_bits,
    arbrc_memory_bits,
    billm_memory_bits,
    compression_ratio,
    fp16_memory_bits,
    load_quantized,
    load_tensor,
    model_memory_report,
    ptqtp_memory_bits,
    read_quantized,
    save_quantized,
    save_tensor,
    tensor_from_bytes,
    tensor_to_bytes,
    tritplanes_memory_bits,
    write_quantized,
)
from .trits import (
    GroupLayout,
    LayerMeta,
    QuantizedLayer,
    group_reshape,
    pack_trits,
    sparsity,
    ungroup,
    unpack_trits,
)

__version__ = "0.1.0"

__all__ = [
    "CorruptDataError",
    "CorruptHeaderError",
    "DecomposeConfig",
    "GroupLayout",
    "InvalidTritCodeError",
    "IterationRecord",
    "IterationTrace",
    "LayerMeta",
    "LayerShape",
    "MemoryModel",
    "MultiplyCensus",
    "OracleResult",
    "QuantizedLayer",
    "RidgeSystem",
    "ShapeError",
    "SingularSystemError",
    "TritplaneError",
    "TruncatedPayloadError",
    "adapt_lambda",
    "arbrc_cgb_memory_bits",
    "arbrc_memory_bits",
    "bench_matvec",
    "billm_memory_bits",
    "build_basis",
    "compression_ratio",
    "condition_estimate",
    "decompose",
    "forward",
    "forward_packed",
    "fp16_memory_bits",
    "frobenius_error",
    "frobenius_error_sq",
    "global_optimum_row",
    "group_reshape",
    "init_planes",
    "load_quantized",
    "load_tensor",
    "model_memory_report",
    "naive_reconstruct_error",
    "pack_trits",
    "ptqtp_memory_bits",
    "read_quantized",
    "reconstruct",
    "save_quantized",
    "save_tensor",
    "solve_ridge",
    "sparsity",
    "tensor_from_bytes",
    "tensor_to_bytes",
    "ternary_dot",
    "tritplanes_memory_bits",
    "ungroup",
    "unpack_trits",
    "update_trits_row",
    "write_quantized",
]
