"""Regenerate the frozen golden fixtures under tests/golden/.

The outputs are part of the file-format contract; rerunning this script must
be a no-op unless the format itself changes (which requires a version bump).
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from tritplane.decompose import DecomposeConfig, decompose, reconstruct  # noqa: E402
from tritplane.storage import tensor_to_bytes, write_quantized  # noqa: E402

GOLDEN = pathlib.Path(__file__).resolve().parents[1] / "tests" / "golden"


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    w = np.zeros((4, 4))
    layer, _ = decompose(w, DecomposeConfig(group_size=4))

    (GOLDEN / "zero_4x4_g4.ptq1").write_bytes(write_quantized(layer))
    (GOLDEN / "zero_4x4.fpt1").write_bytes(tensor_to_bytes(w, "f32"))
    (GOLDEN / "zero_4x4_recon.fpt1").write_bytes(tensor_to_bytes(reconstruct(layer), "f32"))
    for name in ("zero_4x4_g4.ptq1", "zero_4x4.fpt1", "zero_4x4_recon.fpt1"):
        data = (GOLDEN / name).read_bytes()
        print(f"{name}: {len(data)} bytes  {data.hex()}")


if __name__ == "__main__":
    main()
