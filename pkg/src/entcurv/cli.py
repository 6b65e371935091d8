"""Command-line front end: ``entcurv <subcommand> [flags]``.

Exit status is 0 on success, 1 when a verifier finds a violation and 2 on
usage or input errors.  JSON output has sorted keys and 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import bridge_transport as bt
from . import verify_suite as vs
from .curvature_compare import compare_table
from .errors import EntcurvError
from .graph_core import GraphSpace, graph_from_json, with_measure
from .local_curvature import curvature_report, dumps, fmt_number
from .model_zoo import IsingSpec, cube_curvature_consequences, lattice_av, parse_model, rho_tilde, rho_v
from .perturbation import perturbed_k, potential_vector
from .simplex_opt import MULTISTART
from .spectral_tools import cheeger_constants, lambda2


class UsageError(Exception):
    pass


# input handling

def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--model", help="NAME:PARAMS, e.g. hypercube:4, lattice-box:5,5, product:path:3*cycle:4")
    src.add_argument("--graph", help="graph JSON file")
    p.add_argument("--measure", default="uniform", help="uniform or a JSON file (label -> weight, or a list)")
    p.add_argument("--generator", choices=("l0", "l1", "l2"), help="rates built from the measure")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--seed", type=int, default=0)


def load_space(args) -> GraphSpace:
    if args.model:
        g = parse_model(args.model)
    else:
        g = graph_from_json(args.graph, args.generator)
    if args.measure != "uniform":
        with open(args.measure) as fh:
            data = json.load(fh)
        m = [float(data[g.label(i)]) for i in range(g.n)] if isinstance(data, dict) else data
        g = with_measure(g, m, args.generator)
    elif args.generator and args.model:
        g = with_measure(g, g.measure, args.generator)
    return g


def _load_measure(g: GraphSpace, path: str) -> np.ndarray:
    with open(path) as fh:
        return bt.as_measure(g, json.load(fh))


def _t_grid(text: str | None) -> tuple[float, ...]:
    if not text:
        return vs.T_GRID
    ts = tuple(float(s) for s in text.split(","))
    if any(not 0 < t < 1 for t in ts):
        raise UsageError("--t-grid values must lie in (0, 1)")
    return ts


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# subcommands

def cmd_curvature(args) -> int:
    g = load_space(args)
    rep = curvature_report(g, cap=args.subset_cap, mode=MULTISTART if args.heuristic else None)
    _emit(args, rep.to_csv() if args.format == "csv" else rep.to_json())
    for key, val in rep.summary.items():
        print(f"{key.replace('_', ' ')} = {fmt_number(val)}", file=sys.stderr)
    if rep.infimum("r") == math.inf and g.n > 1 and all(g.degree(x) == g.n - 1 for x in range(g.n)):
        print("r = +inf (complete graph)", file=sys.stderr)
    return 0


def cmd_bridge(args) -> int:
    g = load_space(args)
    if not 0 <= args.t <= 1:
        raise UsageError("--t must lie in [0, 1]")
    nu = bt.dirac_bridge(g, args.src, args.dst, args.t)
    out = {"from": args.src, "to": args.dst, "t": args.t, "mass": float(nu.sum()),
           "measure": bt.measure_to_dict(g, nu)}
    _emit(args, dumps(out))
    return 0


def _pair_measures(g: GraphSpace, args) -> tuple[np.ndarray, np.ndarray]:
    if args.nu0 and args.nu1:
        return _load_measure(g, args.nu0), _load_measure(g, args.nu1)
    if args.src is not None and args.dst is not None:
        return bt.dirac(g, args.src), bt.dirac(g, args.dst)
    raise UsageError("give --nu0/--nu1 files or --from/--to vertices")


def cmd_w1(args) -> int:
    g = load_space(args)
    nu0, nu1 = _pair_measures(g, args)
    pi = bt.w1_coupling(g, nu0, nu1)
    _emit(args, dumps({"w1": float(pi.cost), "coupling": pi.to_dict(g)}))
    return 0


KAPPA_FOR_COST = {"t2": "kappa", "w1sq": "kappa1", "ttilde": "kappa_tilde", "ttilde_sum": "kappa_tilde",
                  "tbar": "kappa_cbar", "t2tilde": "kappa_tilde2", "ctilde": "kappa_tilde2"}


def cmd_verify(args) -> int:
    g = load_space(args)
    check = args.check
    if check == "tensorization":
        if not args.with_model:
            raise UsageError("tensorization needs --with NAME:PARAMS for the second factor")
        out = vs.check_tensorization(g, parse_model(args.with_model))
    elif check == "bonnet-myers":
        pack = vs.curvature_pack(g)
        kappa = args.kappa if args.kappa is not None else pack["kappa"]
        bound, ok = vs.bonnet_myers_bound(g, kappa)
        out = vs.VerifyOutcome(ok, bound - g.diameter, None, 1, args.seed,
                               {"bound": bound, "diameter": g.diameter, "kappa": kappa})
    else:
        pack = vs.curvature_pack(g)
        if check == "displacement":
            kappa = args.kappa
            if kappa is None:
                kappa = pack.get(KAPPA_FOR_COST[args.cost])
                if kappa is None:
                    raise UsageError(f"no curvature constant available for cost {args.cost}")
            out = vs.sweep_displacement(g, args.cost, kappa, args.samples, args.seed, _t_grid(args.t_grid))
        elif check == "transport":
            out = vs.sweep_transport_entropy(g, pack, args.samples, args.seed)
        elif check == "mlsi":
            out = vs.check_mlsi_poincare(g, pack, args.samples, args.seed)
        else:
            raise UsageError(f"unknown check {check}")
    _emit(args, dumps({"check": check, "model": g.name, **out.to_dict()}))
    return 0 if out.holds else 1


def _frange(spec: str) -> list[float]:
    try:
        a, b, step = (float(s) for s in spec.split(":"))
    except ValueError:
        raise UsageError("--beta-sweep expects START:STOP:STEP") from None
    if step <= 0 or b < a:
        raise UsageError("--beta-sweep needs STEP > 0 and STOP >= START")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [round(a + k * step, 12) for k in range(count)]


def cmd_ising(args) -> int:
    path = args.spec or args.potential
    if not path:
        raise UsageError("ising needs --spec FILE")
    with open(path) as fh:
        spec = IsingSpec.from_json(json.load(fh))
    if args.beta_sweep:
        if spec.convention != "spin":
            raise UsageError("--beta-sweep needs a spin specification with an interaction W")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["beta", "rho_tilde"])
        for beta in _frange(args.beta_sweep):
            w.writerow([fmt_number(beta), fmt_number(rho_tilde(spec.V, beta))])
        _emit(args, buf.getvalue())
        return 0
    rho = rho_v(spec)
    out = {"n": spec.n, "rho_v": rho, "consequences": cube_curvature_consequences(rho, spec.n)}
    if spec.convention == "spin":
        out["rho_tilde"] = rho_tilde(spec.V, spec.beta)
    _emit(args, dumps(out))
    return 0


def _lattice_potential(g: GraphSpace, path: str) -> np.ndarray:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "quadratic" in data:
        V = np.asarray(data["quadratic"], float)
        return np.array([0.5 * np.asarray(g.coords[i]) @ V @ np.asarray(g.coords[i]) for i in range(g.n)])
    return potential_vector(g, data)


def cmd_lattice(args) -> int:
    g = load_space(args)
    if not args.potential:
        raise UsageError("lattice needs --potential FILE")
    v = _lattice_potential(g, args.potential)
    verts = args.vertex or [g.label(i) for i in range(g.n) if i not in g.clipped]
    rows = []
    for lab in verts:
        z = g.idx(lab)
        if z in g.clipped:
            raise UsageError(f"vertex {lab} is clipped")
        av = lattice_av(g, v, z)
        row = {"vertex": lab, "lambda_max": av["lambda_max"], "dominant": av["dominant"],
               "K_bound": av.get("K_bound"), "Ktilde_bound": av.get("Ktilde_bound")}
        if args.solve:
            row["K_v"] = perturbed_k(g, v, z).value
        rows.append(row)
    _emit(args, dumps({"model": g.name, "vertices": rows}))
    return 0


def cmd_compare(args) -> int:
    g = load_space(args)
    rows = compare_table(g, args.samples, args.seed)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ["vertex", "K", "r", "rtilde2", "lly_min", "gamma2_min"]
        w.writerow(keys)
        for r in rows:
            w.writerow([r["vertex"]] + [fmt_number(r[k]) for k in keys[1:]])
        _emit(args, buf.getvalue())
    else:
        _emit(args, dumps({"model": g.name, "rows": rows}))
    return 0


def cmd_model_info(args) -> int:
    g = load_space(args)
    info = {"name": g.name, "vertices": g.n, "edges": len(g.edges()), "diameter": g.diameter,
            "max_degree": g.max_degree, "counting_measure": g.is_counting,
            "moves": list(g.moves.names) if g.moves is not None else None, "clipped": len(g.clipped),
            "lambda2": lambda2(g)}
    if g.n <= 24:
        info["cheeger"] = {k: v for k, v in cheeger_constants(g).items()}
    _emit(args, dumps(info))
    return 0


# parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entcurv", description="Entropic curvature bounds on graph spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curvature", help="per-vertex r, r1, rbar, rtilde2")
    _add_source(c)
    _add_common(c)
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact modes where available (default)")
    mode.add_argument("--heuristic", action="store_true", help="force multistart ascent")
    c.add_argument("--subset-cap", type=int, default=12)
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(func=cmd_curvature)

    b = sub.add_parser("bridge", help="zero-temperature bridge between two vertices")
    _add_source(b)
    _add_common(b)
    b.add_argument("--from", dest="src", required=True)
    b.add_argument("--to", dest="dst", required=True)
    b.add_argument("--t", type=float, required=True)
    b.set_defaults(func=cmd_bridge)

    w = sub.add_parser("w1", help="W1 distance and an optimal coupling")
    _add_source(w)
    _add_common(w)
    w.add_argument("--from", dest="src")
    w.add_argument("--to", dest="dst")
    w.add_argument("--nu0")
    w.add_argument("--nu1")
    w.set_defaults(func=cmd_w1)

    v = sub.add_parser("verify", help="numerical check of an implied inequality")
    v.add_argument("check", choices=("displacement", "transport", "mlsi", "bonnet-myers", "tensorization"))
    _add_source(v)
    _add_common(v)
    v.add_argument("--cost", choices=vs.DISPLACEMENT_COSTS, default="t2")
    v.add_argument("--kappa", type=float)
    v.add_argument("--samples", type=int, default=20)
    v.add_argument("--t-grid")
    v.add_argument("--with", dest="with_model", help="second factor for tensorization")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("ising", help="rho / rho-tilde screening of a quadratic potential")
    i.add_argument("--spec")
    i.add_argument("--potential")
    i.add_argument("--beta-sweep")
    _add_common(i)
    i.set_defaults(func=cmd_ising)

    la = sub.add_parser("lattice", help="Av(z) certificates on a box")
    _add_source(la)
    _add_common(la)
    la.add_argument("--potential")
    la.add_argument("--vertex", action="append")
    la.add_argument("--solve", action="store_true", help="also solve K^v at each vertex")
    la.set_defaults(func=cmd_lattice)

    co = sub.add_parser("compare", help="entropic, Lin-Lu-Yau and Gamma_2 side by side")
    _add_source(co)
    _add_common(co)
    co.add_argument("--samples", type=int, default=20)
    co.add_argument("--format", choices=("json", "csv"), default="json")
    co.set_defaults(func=cmd_compare)

    mi = sub.add_parser("model-info", help="size, diameter, spectral gap and Cheeger constants")
    _add_source(mi)
    _add_common(mi)
    mi.set_defaults(func=cmd_model_info)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, EntcurvError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"entcurv: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
