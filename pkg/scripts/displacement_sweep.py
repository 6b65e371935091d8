"""Smallest slack of the displacement inequality for every cost on a model."""

import argparse

from entcurv.cli import KAPPA_FOR_COST
from entcurv.model_zoo import parse_model
from entcurv.verify_suite import DISPLACEMENT_COSTS, curvature_pack, sweep_displacement


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="hypercube:3")
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    g = parse_model(args.model)
    pack = curvature_pack(g)
    print("cost,kappa,min_slack,holds")
    for cost in DISPLACEMENT_COSTS:
        kappa = pack.get(KAPPA_FOR_COST[cost])
        if kappa is None:
            print(f"{cost},,,skipped")
            continue
        try:
            out = sweep_displacement(g, cost, kappa, args.samples, args.seed)
        except Exception as exc:  # missing moves and the like
            print(f"{cost},{kappa:.6f},,{type(exc).__name__}")
            continue
        print(f"{cost},{kappa:.6f},{out.slack:.3e},{out.holds}")


if __name__ == "__main__":
    main()
