"""Mesh sweep under the alternating boundary condition.

One pass estimates the weak discrete crossing, the metric crossing, their
per-sample gap and the closed-pivotal-edge event on shared replica streams.
The gap stays bounded away from zero while the pivotal frequency falls
with the mesh.
"""

import argparse
import sys

from gffperc.harness import LAMBDA0, ExperimentConfig, sweep


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=float, default=1.0)
    ap.add_argument("--lambda", dest="lam", type=str, default="1.0",
                    help="boundary level, or the symbolic name lambda0")
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=0)
    ap.add_argument("--finest", type=int, default=32,
                    help="finest mesh as an inverse power of two")
    ap.add_argument("--out", type=str, default="alternating_sweep.csv")
    args = ap.parse_args(argv)

    lam = LAMBDA0 if args.lam.lower() == "lambda0" else float(args.lam)
    dens = []
    d = 8
    while d <= args.finest:
        dens.append(d)
        d *= 2
    cfg = ExperimentConfig(
        L=args.L, lam=lam, bc="alternating",
        events=("discrete_alt", "metric_alt", "gap", "closed_pivotal"),
        deltas=tuple(1.0 / d for d in dens),
        samples=args.samples, seed=args.seed, workers=args.workers,
        out=args.out,
    )
    rows = sweep(cfg)
    for r in rows:
        if r["delta"] == "":
            print(f"{r['event']}: loglog slope {r['p_hat']:+.3f}")
        else:
            print(f"delta=1/{round(1 / r['delta']):<3d} {r['event']:14s} "
                  f"p={r['p_hat']:.4f} ci=[{r['ci_low']:.4f}, {r['ci_high']:.4f}]")
    print(f"lambda = {lam:.6f}; wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
