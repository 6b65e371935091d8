"""rho~(beta) for Curie-Weiss, antiferromagnetic and SK interactions."""

import argparse

import numpy as np

from entcurv.model_zoo import curie_weiss, rho_tilde, sk_sample


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--beta-max", type=float, default=0.25)
    ap.add_argument("--steps", type=int, default=26)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    models = {"curie_weiss": curie_weiss(args.n), "antiferro": -curie_weiss(args.n),
              "sk": sk_sample(args.n, args.seed)}
    print("beta," + ",".join(models))
    for beta in np.linspace(0, args.beta_max, args.steps):
        vals = [rho_tilde(W, float(beta)) if beta > 0 else 1.0 for W in models.values()]
        print(f"{beta:.4f}," + ",".join(f"{v:.6f}" for v in vals))


if __name__ == "__main__":
    main()
