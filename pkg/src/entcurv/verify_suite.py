"""Numerical checkers for the inequalities that entropic curvature bounds imply.

Every checker returns a VerifyOutcome whose ``slack`` is RHS - LHS (positive
means satisfied).  An inequality holds when slack >= -1e-9 (1 + |RHS|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bridge_transport import (Coupling, as_measure, cbar_cost, cost_infimum, dirac_bridge, mixture_bridge,
                               relative_entropy, selected_coupling, transport_cost, w1_coupling)
from .errors import HypothesisFails, InfiniteEntropy, MissingMoves, NonPositiveCurvature
from .graph_core import GraphSpace, interval
from .local_curvature import BallSolver, curvature_report, r_local, rtilde2_local

REL_TOL = 1e-9
T_GRID = tuple(round(0.1 * k, 10) for k in range(1, 10))


def tolerance(rhs: float) -> float:
    return REL_TOL * (1.0 + abs(rhs))


@dataclass
class VerifyOutcome:
    holds: bool
    slack: float
    witness: dict | None = None
    samples: int = 1
    seed: int | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"holds": self.holds, "slack": self.slack, "witness": self.witness, "samples": self.samples,
                "seed": self.seed, "notes": self.notes}


def _merge(outcomes: Sequence[VerifyOutcome], seed=None, **notes) -> VerifyOutcome:
    worst = min(outcomes, key=lambda o: o.slack)
    return VerifyOutcome(all(o.holds for o in outcomes), worst.slack, None if worst.holds else worst.witness,
                         sum(o.samples for o in outcomes), seed, dict(notes))


def random_measure(g: GraphSpace, rng: np.random.Generator, max_support: int = 6) -> np.ndarray:
    """Dirichlet(1,...,1) weights on a uniformly drawn support of size <= max_support."""
    k = int(rng.integers(1, min(max_support, g.n) + 1))
    support = rng.choice(g.n, size=k, replace=False)
    out = np.zeros(g.n)
    out[support] = rng.dirichlet(np.ones(k))
    return out


def _entropy(nu: np.ndarray, m: np.ndarray) -> float:
    h = relative_entropy(nu, m)
    if math.isinf(h):
        raise InfiniteEntropy("measure charges a point of zero reference mass")
    return h


# curvature constants

def curvature_pack(g: GraphSpace) -> dict[str, float]:
    """Global lower bounds from the local quantities (infima over unclipped vertices).

    kappa = inf r (T2 cost), kappa1 = inf r1 (W1^2), kappa_cbar = inf rbar,
    kappa_tilde = 1 - e^{-inf r} (max-form T~ cost), kappa_tilde2 = inf r~2.
    """
    rep = curvature_report(g)
    s = rep.summary
    pack = {"kappa": s["inf_r"]}
    if s["inf_r1"] is not None:
        pack["kappa1"] = s["inf_r1"]
    if s["inf_rbar"] is not None:
        pack["kappa_cbar"] = s["inf_rbar"]
    if s["inf_rtilde2"] is not None and g.moves is not None:
        pack["kappa_tilde2"] = s["inf_rtilde2"]
    if s["inf_r"] is not None and s["inf_r"] > 0:
        pack["kappa_tilde"] = 1.0 - math.exp(-s["inf_r"])
    return pack


def ctilde_D(g: GraphSpace) -> int:
    """1 when d(z, ss(z)) <= 1 for every move s and vertex z, else the diameter."""
    if g.moves is None:
        raise MissingMoves(g.name)
    for s in g.moves.maps:
        for z in range(g.n):
            if g.d(z, int(s[int(s[z])])) > 1:
                return g.diameter
    return 1


# displacement convexity

DISPLACEMENT_COSTS = ("t2", "w1sq", "ttilde", "ttilde_sum", "tbar", "t2tilde", "ctilde")


def check_displacement(g: GraphSpace, nu0, nu1, cost_kind: str, kappa: float,
                       t_grid: Sequence[float] = T_GRID, D: float | None = None,
                       coupling: Coupling | None = None) -> VerifyOutcome:
    """H(nu_t|m) <= (1-t)H(nu0|m) + tH(nu1|m) - t(1-t)/2 kappa C_t(pi) along the bridge of ``coupling``.

    The default coupling is the zero-temperature selection among W1-optimal
    plans; an arbitrary optimal vertex of the LP can give false negatives.
    """
    if cost_kind not in DISPLACEMENT_COSTS:
        raise ValueError(f"cost must be one of {DISPLACEMENT_COSTS}")
    nu0, nu1 = as_measure(g, nu0), as_measure(g, nu1)
    m = g.measure
    pi = coupling or selected_coupling(g, nu0, nu1)
    h0, h1 = _entropy(nu0, m), _entropy(nu1, m)
    if cost_kind == "ctilde" and D is None:
        D = ctilde_D(g)
    static = None
    if cost_kind in ("t2", "w1sq", "ttilde", "ttilde_sum", "t2tilde"):
        static = transport_cost(g, pi, cost_kind)
    worst = VerifyOutcome(True, math.inf)
    for t in t_grid:
        cost = static if static is not None else transport_cost(g, pi, cost_kind, t=t, D=D or 1.0)
        lhs = _entropy(mixture_bridge(g, pi, t), m)
        if kappa == 0 or cost == 0:
            penalty = 0.0
        else:
            penalty = t * (1 - t) / 2 * kappa * cost
        rhs = (1 - t) * h0 + t * h1 - penalty
        slack = rhs - lhs
        ok = slack >= -tolerance(rhs)
        if slack < worst.slack:
            worst = VerifyOutcome(ok, slack, {"t": t, "lhs": lhs, "rhs": rhs})
    worst.holds = bool(worst.holds)
    worst.samples = len(t_grid)
    worst.notes = {"coupling": "given" if coupling else "zero-temperature selection", "cost": cost_kind,
                   "kappa": kappa}
    if D is not None:
        worst.notes["D"] = D
    if not worst.holds:
        worst.witness.update({"nu0": nu0.tolist(), "nu1": nu1.tolist(), "plan": pi.to_dict(g)})
    return worst


def sweep_displacement(g: GraphSpace, cost_kind: str, kappa: float, samples: int = 20, seed: int = 0,
                       t_grid: Sequence[float] = T_GRID) -> VerifyOutcome:
    rng = np.random.default_rng(seed)
    outs = [check_displacement(g, random_measure(g, rng), random_measure(g, rng), cost_kind, kappa, t_grid)
            for _ in range(samples)]
    out = _merge(outs, seed, cost=cost_kind, kappa=kappa, pairs=samples)
    return out


# Prekopa-Leindler

def _pl_cost(cost, t: float, d: int) -> float:
    if callable(cost):
        return float(cost(t, d))
    if cost == "t2":
        return float(d * (d - 1))
    if cost == "tbar":
        return cbar_cost(t, d)
    raise ValueError(f"unknown cost {cost!r}")


def _pl_needed(g: GraphSpace, f, g_fn, t: float, kappa_c: float, cost) -> np.ndarray:
    need = np.empty((g.n, g.n))
    for x in range(g.n):
        for y in range(g.n):
            c = _pl_cost(cost, t, g.d(x, y))
            need[x, y] = (1 - t) * f[x] + t * g_fn[y] - (0.0 if c == 0 else kappa_c / 2 * t * (1 - t) * c)
    return need


def prekopa_envelope(g: GraphSpace, f, g_fn, t: float, kappa_c: float, cost="t2") -> np.ndarray:
    """Smallest h of the form h(z) = max over pairs (x, y) with z in [x, y] of the needed value.

    Every bridge nu_t^{x,y} is carried by [x, y], so this h satisfies the hypothesis.
    """
    f, g_fn = np.asarray(f, float), np.asarray(g_fn, float)
    need = _pl_needed(g, f, g_fn, t, kappa_c, cost)
    h = np.full(g.n, -math.inf)
    for x in range(g.n):
        for y in range(g.n):
            for z in interval(g, x, y):
                h[z] = max(h[z], need[x, y])
    return h


def check_prekopa_leindler(g: GraphSpace, f, g_fn, h_fn, t: float, kappa_c: float, cost="t2") -> VerifyOutcome:
    """Check the pointwise hypothesis on every pair, then the integrated inequality.

    Raises HypothesisFails when some pair violates the hypothesis.
    """
    f, g_fn, h = (np.asarray(a, float) for a in (f, g_fn, h_fn))
    need = _pl_needed(g, f, g_fn, t, kappa_c, cost)
    for x in range(g.n):
        for y in range(g.n):
            got = float(h @ dirac_bridge(g, x, y, t))
            if got - need[x, y] < -tolerance(got):
                raise HypothesisFails((g.label(x), g.label(y)), got - need[x, y])
    m = g.measure
    lhs = float(np.sum(np.exp(f) * m)) ** (1 - t) * float(np.sum(np.exp(g_fn) * m)) ** t
    rhs = float(np.sum(np.exp(h) * m))
    slack = rhs - lhs
    ok = slack >= -tolerance(rhs)
    return VerifyOutcome(ok, slack, None if ok else {"lhs": lhs, "rhs": rhs}, g.n * g.n,
                         notes={"t": t, "kappa_c": kappa_c})


# transport-entropy

PACK_COSTS = {"kappa1": "w1sq", "kappa_tilde": "ttilde", "kappa": "t2", "kappa_cbar": "cbar_star_harmonic",
              "kappa_tilde2": "t2tilde"}


def check_transport_entropy(g: GraphSpace, nu0, nu1, kappa_pack: dict, n_random: int = 50,
                            seed: int = 0) -> VerifyOutcome:
    """(1/2) max over positive constants of kappa * cost(nu0, nu1) <= (sqrt H(nu0|mu) + sqrt H(nu1|mu))^2.

    Weak-cost infima are upper-bounded by the best of the W1 coupling and
    ``n_random`` random couplings, which can only make the check harder.
    """
    nu0, nu1 = as_measure(g, nu0), as_measure(g, nu1)
    mu = g.mu
    rhs = (math.sqrt(max(0.0, _entropy(nu0, mu))) + math.sqrt(max(0.0, _entropy(nu1, mu)))) ** 2
    terms, exact = {}, {}
    for key, kind in PACK_COSTS.items():
        k = kappa_pack.get(key)
        if k is None or not k > 0 or math.isinf(k):
            continue
        if kind == "t2tilde" and g.moves is None:
            continue
        val, ex = cost_infimum(g, nu0, nu1, kind, n_random=n_random, seed=seed)
        terms[key] = 0.5 * k * val
        exact[key] = ex
    lhs = max(terms.values(), default=0.0)
    slack = rhs - lhs
    ok = slack >= -tolerance(rhs)
    return VerifyOutcome(ok, slack, None if ok else {"terms": terms, "rhs": rhs}, 1, seed,
                         {"terms": terms, "exact": exact, "rhs": rhs})


def sweep_transport_entropy(g: GraphSpace, kappa_pack: dict, samples: int = 20, seed: int = 0) -> VerifyOutcome:
    rng = np.random.default_rng(seed)
    outs = [check_transport_entropy(g, random_measure(g, rng), random_measure(g, rng), kappa_pack, seed=seed + i)
            for i in range(samples)]
    return _merge(outs, seed, pack=kappa_pack)


def transport_diameter_bound(g: GraphSpace, kappa1: float) -> float:
    """Dirac-to-Dirac W1 form: Diam <= sqrt(-8 log(inf mu) / kappa1)."""
    if not kappa1 > 0:
        raise NonPositiveCurvature(f"kappa1 = {kappa1}")
    return math.sqrt(-8.0 * math.log(float(np.min(g.mu))) / kappa1)


# functional inequalities

def _ent(f: np.ndarray, mu: np.ndarray) -> float:
    m = float(mu @ f)
    return float(mu @ (f * np.log(f))) - m * math.log(m)


def _var(g_fn: np.ndarray, mu: np.ndarray) -> float:
    m = float(mu @ g_fn)
    return float(mu @ (g_fn - m) ** 2)


def _neg(a):
    return np.maximum(0.0, -a)


def functional_forms(g: GraphSpace, f: np.ndarray, g_fn: np.ndarray, pack: dict, D: float | None = None) -> dict:
    """Left and right sides of each modified log-Sobolev and Poincare inequality."""
    mu = g.mu
    out = {}
    kt = pack.get("kappa_tilde")
    if kt is not None and kt > 0:
        lf = np.log(f)
        sup_l = np.array([max(max(0.0, lf[x] - lf[y]) ** 2 for y in g.neighbors(x)) for x in range(g.n)])
        sup_g = np.array([max(max(0.0, g_fn[x] - g_fn[y]) ** 2 for y in g.neighbors(x)) for x in range(g.n)])
        out["logsob"] = (_ent(f, mu), float(mu @ (sup_l * f)) / (2 * kt))
        out["poincare_sup"] = (_var(g_fn, mu), float(mu @ sup_g) / kt)
    k2 = pack.get("kappa_tilde2")
    if k2 is not None and k2 > 0 and g.moves is not None:
        lf = np.log(f)
        maps = [np.asarray(s) for s in g.moves.maps]
        dl = [lf[s] - lf for s in maps]
        dg = [g_fn[s] - g_fn for s in maps]
        neg_l = sum(_neg(a) ** 2 for a in dl)
        out["logsobT3"] = (_ent(f, mu), float(mu @ (neg_l * f)) / (2 * k2))
        if D is not None:
            # (k D^2 / 2) h*(2a/(D k)) with h*(2v)/2 = e^{-v} + v - 1
            a = [_neg(x) / (D * k2) for x in dl]
            body = sum(np.exp(-v) + v - 1 for v in a)
            out["logsobbis"] = (_ent(f, mu), float(mu @ (k2 * D * D * body * f)))
        out["poincareT3bis"] = (_var(g_fn, mu), float(mu @ sum(_neg(a) ** 2 for a in dg)) / k2)
        out["poincareT3"] = (_var(g_fn, mu), float(mu @ sum(a ** 2 for a in dg)) / (2 * k2))
    return out


def check_mlsi_poincare(g: GraphSpace, kappa_tilde_pack: dict, samples: int = 50, seed: int = 0,
                        D: float | None = None) -> VerifyOutcome:
    """Random positive f (log-uniform on [-2, 2]) and Gaussian g against every applicable form."""
    positive = [k for k in ("kappa_tilde", "kappa_tilde2") if (kappa_tilde_pack.get(k) or 0) > 0]
    if not positive:
        raise NonPositiveCurvature("need a positive kappa_tilde or kappa_tilde2")
    if D is None and "kappa_tilde2" in positive and g.moves is not None:
        D = ctilde_D(g)
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    witness = None
    ok = True
    for i in range(samples):
        f = np.exp(rng.uniform(-2.0, 2.0, g.n))
        g_fn = rng.normal(size=g.n)
        for name, (lhs, rhs) in functional_forms(g, f, g_fn, kappa_tilde_pack, D).items():
            slack = rhs - lhs
            if slack < worst.get(name, math.inf):
                worst[name] = slack
            if slack < -tolerance(rhs):
                ok = False
                witness = witness or {"sample": i, "form": name, "lhs": lhs, "rhs": rhs}
    return VerifyOutcome(ok, min(worst.values()), witness, samples, seed, {"min_slack": worst, "D": D})


# diameter bounds

def bonnet_myers_bound(g: GraphSpace, kappa: float) -> tuple[float, bool]:
    """Diam <= 8 log(Delta sup m / inf m) / kappa + 1; kappa = +inf gives the limiting bound 1."""
    if not kappa > 0:
        raise NonPositiveCurvature(f"kappa = {kappa}")
    m = g.measure
    if math.isinf(kappa):
        bound = 1.0
    else:
        bound = 8.0 * math.log(g.max_degree * float(m.max()) / float(m.min())) / kappa + 1.0
    return bound, g.diameter <= bound + 1e-12


# tensorization

def _factor_values(g: GraphSpace) -> tuple[list[float], list[float]]:
    rs, rt = [], []
    for z in range(g.n):
        bs = BallSolver(g, z)
        rs.append(r_local(g, z, bs))
        rt.append(rtilde2_local(g, z, bs))
    return rs, rt


def tensor_bound(rs: Sequence[float]) -> float:
    """Lower bound on r of a product vertex from the factor values."""
    lo = min(rs)
    if lo <= 0:
        return lo
    return -2.0 * math.log(1.0 - (1.0 - math.exp(-lo / 2)) / len(rs))


def check_tensorization(g1: GraphSpace, g2: GraphSpace) -> VerifyOutcome:
    """r and r~2 on the product against the bounds from the two factors, at every vertex."""
    from .model_zoo import product_space

    prod = product_space(g1, g2)
    r1, t1 = _factor_values(g1)
    r2, t2 = _factor_values(g2)
    worst = VerifyOutcome(True, math.inf)
    checked = 0
    for a in range(g1.n):
        for b in range(g2.n):
            z = a * g2.n + b
            if z in prod.clipped:
                continue
            bs = BallSolver(prod, z)
            r, rt = r_local(prod, z, bs), rtilde2_local(prod, z, bs)
            for name, val, bound in (("r", r, tensor_bound([r1[a], r2[b]])), ("rtilde2", rt, min(t1[a], t2[b]))):
                slack = math.inf if math.isinf(val) else val - bound
                ok = slack >= -tolerance(bound)
                checked += 1
                if slack < worst.slack:
                    worst = VerifyOutcome(ok, slack, {"vertex": prod.label(z), "quantity": name, "value": val,
                                                      "bound": bound})
    worst.samples = checked
    worst.notes = {"product": prod.name}
    if worst.holds:
        worst.witness = None
    return worst


__all__ = ["VerifyOutcome", "random_measure", "curvature_pack", "ctilde_D", "check_displacement",
           "sweep_displacement", "prekopa_envelope", "check_prekopa_leindler", "check_transport_entropy",
           "sweep_transport_entropy", "transport_diameter_bound", "functional_forms", "check_mlsi_poincare",
           "bonnet_myers_bound", "tensor_bound", "check_tensorization", "tolerance", "T_GRID"]
