"""Entropic, Lin-Lu-Yau and Gamma_2 curvature side by side on several models."""

import argparse
import csv
import sys

from entcurv.curvature_compare import compare_table
from entcurv.local_curvature import fmt_number
from entcurv.model_zoo import parse_model

DEFAULT = ["hypercube:3", "windmill:4,2", "petersen", "cycle:6", "lattice-box:5,5"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("models", nargs="*", default=DEFAULT)
    ap.add_argument("--samples", type=int, default=20)
    args = ap.parse_args()
    keys = ["K", "r", "rtilde2", "lly_min", "gamma2_min"]
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["model", "vertex"] + keys)
    for name in args.models:
        for row in compare_table(parse_model(name), args.samples):
            out.writerow([name, row["vertex"]] + [fmt_number(row[k]) for k in keys])


if __name__ == "__main__":
    main()
