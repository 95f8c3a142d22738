"""Command-line frontend.

Exit codes: 0 success, 2 malformed/mismatched data, 3 usage error. All
machine-readable output is JSON (reports, stats, bench) or CSV (sweeps);
output files are written atomically via a temp file plus rename.

The TRITPLANE_THREADS environment variable sets the worker count for
manifest-mode batches (default 1).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import storage
from .decompose import DecomposeConfig, decompose, reconstruct
from .errors import ShapeError, TritplaneError
from .kernel import bench_matvec
from .linalg import frobenius_error
from .oracle import MAX_ORACLE_LEN, global_optimum_row
from .trits import sparsity

REPORT_SCHEMA = 1
SWEEP_CSV_HEADER = "param,value,iterations,final_error,wall_time_s"
_SWEEP_PARAMS = {
    "iters": ("max_iterations", int),
    "eps": ("tolerance", float),
    "cond-threshold": ("condition_threshold", float),
}


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 3."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _atomic_write_text(path, text: str) -> None:
    _atomic_write_bytes(path, text.encode())


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _thread_count() -> int:
    raw = os.environ.get("TRITPLANE_THREADS", "1")
    try:
        count = int(raw)
    except ValueError as exc:
        raise UsageError(f"TRITPLANE_THREADS must be an integer, got {raw!r}") from exc
    if count < 1:
        raise UsageError("TRITPLANE_THREADS must be >= 1")
    return count


def _build_config(args) -> DecomposeConfig:
    try:
        return DecomposeConfig(
            group_size=args.group,
            max_iterations=args.tmax,
            tolerance=args.eps,
            lambda_init=args.lambda_init,
            lambda_max=args.lambda_max,
            condition_threshold=args.cond_threshold,
            final_refit=args.final_refit,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _quantize_one(input_path: str, output_path: str, cfg: DecomposeConfig) -> dict:
    """Quantize one FPT1 file, write the PTQ1 artifact, and report on it.

    Every number in the report is recomputed from the emitted bytes (float16
    scale rounding included), so re-running ``stats`` reproduces it exactly.
    """
    w = storage.load_tensor(input_path)
    t0 = time.perf_counter()
    layer, trace = decompose(w, cfg)
    wall = time.perf_counter() - t0

    data = storage.write_quantized(layer)
    _atomic_write_bytes(output_path, data)

    written = storage.read_quantized(data)
    err = frobenius_error(w, reconstruct(written))
    w_norm = float(np.linalg.norm(w))
    n, d = layer.layout.n, layer.layout.d
    return {
        "schema": REPORT_SCHEMA,
        "input": {"path": str(input_path), "n": n, "d": d},
        "output": str(output_path),
        "config": dataclasses.asdict(cfg),
        "iterations": layer.meta.iterations,
        "converged": layer.meta.converged,
        "optimizer_error": trace.final_error,
        "final_error": err,
        "relative_error": err / w_norm if w_norm > 0 else 0.0,
        "sparsity": [
            sparsity(written.plane1, written.layout),
            sparsity(written.plane2, written.layout),
        ],
        "compression_ratio": storage.compression_ratio(n, d, cfg.group_size),
        "wall_time_s": wall,
    }


def cmd_quantize(args) -> int:
    cfg = _build_config(args)
    if args.manifest:
        if args.input or args.output:
            raise UsageError("--manifest cannot be combined with --input/--output")
        entries = _load_manifest(args.manifest, ("name", "input", "output"))
        jobs = [(e["name"], e["input"], e["output"]) for e in entries]
        with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
            futures = {name: pool.submit(_quantize_one, inp, out, cfg) for name, inp, out in jobs}
            layers = {name: fut.result() for name, fut in futures.items()}
        report = {"schema": REPORT_SCHEMA, "layers": layers}
    else:
        if not args.input or not args.output:
            raise UsageError("either --input/--output or --manifest is required")
        report = _quantize_one(args.input, args.output, cfg)

    text = _dump_json(report)
    if args.report:
        _atomic_write_text(args.report, text + "\n")
    print(text)
    return 0


def cmd_dequantize(args) -> int:
    layer = storage.load_quantized(args.input)
    _atomic_write_bytes(args.output, storage.tensor_to_bytes(reconstruct(layer), args.dtype))
    return 0


def _stats_one(weights_path: str, quantized_path: str) -> dict:
    w = storage.load_tensor(weights_path)
    layer = storage.load_quantized(quantized_path)
    if w.shape != layer.shape:
        raise ShapeError(f"weights {w.shape} do not match quantized layer {layer.shape}")
    err = frobenius_error(w, reconstruct(layer))
    w_norm = float(np.linalg.norm(w))
    n, d = layer.shape
    g = layer.layout.group_size
    return {
        "schema": REPORT_SCHEMA,
        "weights": {"path": str(weights_path), "n": n, "d": d},
        "quantized": {
            "path": str(quantized_path),
            "group_size": g,
            "iterations": layer.meta.iterations,
            "recorded_error": layer.meta.final_error,
        },
        "final_error": err,
        "relative_error": err / w_norm if w_norm > 0 else 0.0,
        "sparsity": [sparsity(layer.plane1, layer.layout), sparsity(layer.plane2, layer.layout)],
        "memory": {
            "fp16_bits": storage.fp16_memory_bits(n, d),
            "ptqtp_bits": storage.ptqtp_memory_bits(n, d, g),
            "compression_ratio": storage.compression_ratio(n, d, g),
        },
    }


def cmd_stats(args) -> int:
    if args.manifest:
        if args.weights or args.quantized:
            raise UsageError("--manifest cannot be combined with --weights/--quantized")
        entries = _load_manifest(args.manifest, ("name", "weights", "quantized"))
        with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
            futures = {
                e["name"]: pool.submit(_stats_one, e["weights"], e["quantized"])
                for e in entries
            }
            layers = {name: fut.result() for name, fut in futures.items()}
        total_fp16 = sum(v["memory"]["fp16_bits"] for v in layers.values())
        total_ptqtp = sum(v["memory"]["ptqtp_bits"] for v in layers.values())
        report = {
            "schema": REPORT_SCHEMA,
            "layers": layers,
            "total": {
                "fp16_gb": total_fp16 / 8 / 1e9,
                "ptqtp_gb": total_ptqtp / 8 / 1e9,
            },
        }
    else:
        if not args.weights or not args.quantized:
            raise UsageError("either --weights/--quantized or --manifest is required")
        report = _stats_one(args.weights, args.quantized)
    print(_dump_json(report))
    return 0


def cmd_sweep(args) -> int:
    field, cast = _SWEEP_PARAMS[args.param]
    try:
        values = [cast(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse --values for {args.param}: {exc}") from exc
    if not values:
        raise UsageError("--values must list at least one value")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")

    w = storage.load_tensor(args.input)
    configs = []
    for value in values:
        try:
            configs.append(dataclasses.replace(DecomposeConfig(), **{field: value}))
        except ValueError as exc:
            raise UsageError(f"invalid {args.param} value {value}: {exc}") from exc

    # Repeats are interleaved across values and reduced with min so that
    # clock drift and scheduler interference cannot masquerade as a trend.
    walls = [[] for _ in values]
    results = [None] * len(values)
    if args.repeats > 1:
        for cfg in configs:
            decompose(w, cfg)  # untimed warmup stabilizes caches and clocks
    for _ in range(args.repeats):
        for i, cfg in enumerate(configs):
            t0 = time.perf_counter()
            results[i] = decompose(w, cfg)
            walls[i].append(time.perf_counter() - t0)

    lines = [SWEEP_CSV_HEADER]
    for value, (layer, trace), times in zip(values, results, walls):
        lines.append(
            f"{args.param},{value},{layer.meta.iterations},"
            f"{trace.final_error!r},{min(times)!r}"
        )
    text = "\n".join(lines) + "\n"
    if args.csv:
        _atomic_write_text(args.csv, text)
    else:
        print(text, end="")
    return 0


def cmd_bench(args) -> int:
    if args.n < 1 or args.d < 1 or args.group < 1 or args.reps < 1:
        raise UsageError("--n, --d, --group, and --reps must all be >= 1")
    print(_dump_json(bench_matvec(args.n, args.d, args.group, args.reps, seed=args.seed)))
    return 0


def cmd_oracle_check(args) -> int:
    if args.len < 1 or args.len > MAX_ORACLE_LEN:
        raise UsageError(f"--len must be in [1, {MAX_ORACLE_LEN}]")
    if args.rows < 0:
        raise UsageError("--rows must be >= 0")
    lam = DecomposeConfig().lambda_init
    cfg = DecomposeConfig(group_size=args.len)
    rng = np.random.default_rng(args.seed)
    gaps = []
    for _ in range(args.rows):
        w = rng.standard_normal((1, args.len))
        layer, trace = decompose(w, cfg)
        objective = trace.final_error**2 + lam * float(
            layer.scale1[0] ** 2 + layer.scale2[0] ** 2
        )
        best = global_optimum_row(w[0], lam)
        gaps.append(objective - best.objective)
    violations = sum(1 for g in gaps if g < -1e-9)
    print(
        _dump_json(
            {
                "rows": args.rows,
                "len": args.len,
                "seed": args.seed,
                "violations": violations,
                "min_gap": min(gaps) if gaps else None,
                "max_gap": max(gaps) if gaps else None,
            }
        )
    )
    return 0 if violations == 0 else 1


def cmd_gen(args) -> int:
    n, d = args.shape
    if n < 1 or d < 1:
        raise UsageError("--shape dimensions must be >= 1")
    rng = np.random.default_rng(args.seed)
    if args.dist == "zeros":
        w = np.zeros((n, d))
    elif args.dist == "gaussian":
        w = rng.standard_normal((n, d))
    else:  # representable: every row is exactly 2*t1 + 1*t2
        t1 = rng.integers(-1, 2, size=(n, d)).astype(np.float64)
        t2 = rng.integers(-1, 2, size=(n, d)).astype(np.float64)
        w = 2.0 * t1 + t2
    _atomic_write_bytes(args.out, storage.tensor_to_bytes(w, args.dtype))
    return 0


def _load_manifest(path, required: tuple[str, ...]) -> list[dict]:
    with open(path) as fh:
        doc = json.load(fh)
    entries = doc.get("layers") if isinstance(doc, dict) else doc
    if not isinstance(entries, list):
        raise UsageError("manifest must be a JSON list or an object with a 'layers' list")
    for entry in entries:
        if not isinstance(entry, dict):
            raise UsageError(f"manifest entries must be objects, got {entry!r}")
        missing = [k for k in required if k not in entry]
        if missing:
            raise UsageError(f"manifest entry {entry!r} missing keys {missing}")
    names = [e["name"] for e in entries]
    if len(set(names)) != len(names):
        raise UsageError("manifest layer names must be unique")
    return entries


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    defaults = DecomposeConfig()
    p.add_argument("--group", type=int, default=defaults.group_size, help="columns per scale group")
    p.add_argument("--tmax", type=int, default=defaults.max_iterations, help="iteration cap")
    p.add_argument("--eps", type=float, default=defaults.tolerance, help="scale-movement tolerance")
    p.add_argument("--lambda-init", type=float, default=defaults.lambda_init)
    p.add_argument("--lambda-max", type=float, default=defaults.lambda_max)
    p.add_argument("--cond-threshold", type=float, default=defaults.condition_threshold)
    p.add_argument("--final-refit", action="store_true", help="extra ridge pass after the last trit update")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tritplane", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quantize", help="decompose an FPT1 tensor into a PTQ1 layer")
    p.add_argument("--input", help="FPT1 input path")
    p.add_argument("--output", help="PTQ1 output path")
    p.add_argument("--manifest", help="JSON manifest of {name, input, output} entries")
    p.add_argument("--report", help="also write the JSON run report here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("dequantize", help="reconstruct a dense FPT1 tensor from a PTQ1 layer")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dtype", choices=("f32", "f16"), default="f32")
    p.set_defaults(func=cmd_dequantize)

    p = sub.add_parser("stats", help="error/sparsity/memory summary for a weights+layer pair")
    p.add_argument("--weights")
    p.add_argument("--quantized")
    p.add_argument("--manifest", help="JSON manifest of {name, weights, quantized} entries")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sweep", help="rerun quantization over a parameter grid, emit CSV")
    p.add_argument("--param", required=True, choices=sorted(_SWEEP_PARAMS))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--input", required=True, help="FPT1 input path")
    p.add_argument("--csv", help="output CSV path (stdout when omitted)")
    p.add_argument("--repeats", type=int, default=1, help="wall time is the minimum over this many runs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="time the ternary matvec against a dense baseline")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--group", type=int, default=DecomposeConfig().group_size)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle-check", help="verify the exhaustive lower bound on random rows")
    p.add_argument("--rows", type=int, default=32)
    p.add_argument("--len", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("gen", help="generate an FPT1 test tensor")
    p.add_argument("--shape", type=int, nargs=2, required=True, metavar=("N", "D"))
    p.add_argument("--dist", choices=("zeros", "gaussian", "representable"), default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--dtype", choices=("f32", "f16"), default="f32")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (TritplaneError, OSError, ValueError) as exc:
        # flag problems are raised as UsageError before any work starts, so
        # remaining ValueErrors are data-driven (non-finite tensors, etc.)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
