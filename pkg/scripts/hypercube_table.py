"""Local curvature constants of the uniform hypercube against their closed forms."""

import argparse
import math

from entcurv.local_curvature import vertex_curvature
from entcurv.model_zoo import hypercube
from entcurv.spectral_tools import lambda2


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-dim", type=int, default=6)
    args = ap.parse_args()
    print(f"{'n':>2} {'K':>10} {'1-1/n':>10} {'r':>10} {'r1':>10} {'rbar':>10} {'rtilde2':>8} {'lambda2':>8}")
    for n in range(2, args.max_dim + 1):
        g = hypercube(n)
        vc = vertex_curvature(g, 0)
        print(f"{n:>2} {vc.K:10.6f} {1 - 1 / n:10.6f} {vc.r:10.6f} {vc.r1:10.6f} {vc.rbar:10.6f} "
              f"{vc.rtilde2:8.4f} {lambda2(g):8.4f}")
    print(f"check: r = -2 log(1 - 1/n), e.g. n = 4 gives {-2 * math.log(3 / 4):.6f}")


if __name__ == "__main__":
    main()
