"""Absorption-side frequencies of the normalized driving diffusion.

Runs the Euler scheme for dW = sqrt(2(1 - W^2)) dB over a grid of start
points and compares the hit frequency at +1 with the analytic (1 + x0)/2,
reporting the deviation in standard errors.
"""

import argparse
import math
import sys

from gffperc.limits import sle_hitting_mc


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=7)
    args = ap.parse_args(argv)

    print(f"{'x0':>8s} {'p_hat':>10s} {'analytic':>10s} {'z':>8s}")
    worst = 0.0
    for i in range(args.points):
        x0 = -0.75 + 1.5 * i / max(args.points - 1, 1)
        hits = sle_hitting_mc(x0, args.samples, args.dt, args.seed + i)
        p_hat = hits / args.samples
        p = (1.0 + x0) / 2.0
        z = (p_hat - p) / math.sqrt(p * (1.0 - p) / args.samples)
        worst = max(worst, abs(z))
        print(f"{x0:8.3f} {p_hat:10.4f} {p:10.4f} {z:+8.2f}")
    print(f"worst |z| = {worst:.2f} over {args.points} start points")
    return 0


if __name__ == "__main__":
    sys.exit(main())
