"""Time the multiplication-free matvec against the dense baseline over sizes."""

import argparse
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from tritplane.kernel import bench_matvec  # noqa: E402

SIZES = [(64, 64), (128, 128), (256, 256), (512, 512), (512, 2048)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--group", type=int, default=128)
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    reports = [
        bench_matvec(n, d, min(args.group, d), args.reps, seed=args.seed)
        for n, d in SIZES
    ]
    print(json.dumps(reports, indent=2))


if __name__ == "__main__":
    main()
