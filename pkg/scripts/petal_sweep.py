"""K at the centre of the petal ball as the number of petals grows.

The exact grid is only affordable for tiny balls, so the value here is the
multistart ascent seeded with the stored weight assignment.
"""

import argparse

from entcurv.graph_core import ball_profile
from entcurv.model_zoo import petal
from entcurv.simplex_opt import instance_from_ball, solve_k


def petal_k(n: int, seed: int) -> float:
    g = petal(n)
    seeds = {g.idx(k): v for k, v in g.meta["k_seeds"]["z"].items()}
    inst = instance_from_ball(ball_profile(g, "z"), seed_map=seeds)
    return solve_k(inst, seed=seed).value


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="1,2,4,8,16,27,32,38,50")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("n,K,sign_of_r")
    for n in (int(s) for s in args.sizes.split(",")):
        k = petal_k(n, args.seed)
        sign = "0" if abs(k - 1) <= 1e-9 else ("+" if k < 1 else "-")
        print(f"{n},{k:.9f},{sign}")


if __name__ == "__main__":
    main()
