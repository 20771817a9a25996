"""Table of the analytic crossing limit against the rectangle aspect.

Prints the conformal modulus, the corner images and the limiting crossing
probability over an aspect grid, together with the duality residual
p(L) + p(1/L) - 1, which should vanish to near machine precision.
"""

import argparse
import sys

from gffperc.limits import conformal_images, crossing_limit


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=float, default=0.5)
    ap.add_argument("--hi", type=float, default=2.0)
    ap.add_argument("--count", type=int, default=13)
    args = ap.parse_args(argv)

    print(f"{'L':>8s} {'modulus k':>14s} {'limit':>14s} {'duality residual':>18s}")
    for i in range(args.count):
        L = args.lo + (args.hi - args.lo) * i / max(args.count - 1, 1)
        images = conformal_images(L)
        p = crossing_limit(L)
        residual = p + crossing_limit(1.0 / L) - 1.0
        print(f"{L:8.4f} {images.k:14.10f} {p:14.10f} {residual:18.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
