"""Desk-scale ablation runs: tolerance, iteration cap, and condition threshold.

Generates a fixed Gaussian matrix, sweeps each knob through the CLI, and
leaves one CSV per sweep under results/ for plotting.

Usage: python scripts/run_ablations.py [--n 64] [--d 256] [--seed 4] [--outdir results]
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from tritplane.cli import main as cli  # noqa: E402

SWEEPS = {
    "eps": "1e-1,3e-2,1e-2,3e-3,1e-3,3e-4,1e-4",
    "iters": "1,2,5,10,20,30,50",
    "cond-threshold": "1e0,1e1,1e2,1e4,1e6,1e8,1e12",
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--d", type=int, default=256)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--repeats", type=int, default=9)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    src = outdir / f"gaussian_{args.n}x{args.d}_seed{args.seed}.fpt1"
    rc = cli(["gen", "--shape", str(args.n), str(args.d), "--dist", "gaussian",
              "--seed", str(args.seed), "--out", str(src)])
    if rc:
        return rc

    for param, values in SWEEPS.items():
        csv = outdir / f"sweep_{param.replace('-', '_')}.csv"
        rc = cli(["sweep", "--param", param, "--values", values,
                  "--input", str(src), "--csv", str(csv),
                  "--repeats", str(args.repeats)])
        if rc:
            return rc
        print(f"wrote {csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
