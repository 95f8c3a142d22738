"""Print the model memory footprint comparison for 7B/13B-class shapes."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from tritplane.storage import (  # noqa: E402
    llama_7b_shapes,
    llama_13b_shapes,
    model_memory_report,
)


def main():
    rows = [("7B", llama_7b_shapes()), ("13B", llama_13b_shapes())]
    print(f"{'model':<6} {'fp16':>9} {'ternary':>9} {'ternary G=128':>14}")
    for name, shapes in rows:
        fp16 = model_memory_report(shapes, "fp16")
        flat = model_memory_report(shapes, "ptqtp")
        grouped = model_memory_report(shapes, "ptqtp-grouped")
        print(f"{name:<6} {fp16:>7.2f}GB {flat:>7.2f}GB {grouped:>12.2f}GB")


if __name__ == "__main__":
    main()
