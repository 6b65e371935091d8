"""Per-vertex entropic curvature bounds r, r1, rbar, rtilde2 built from 2-balls."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EnumerationCapped, KAtLeastOne, NonPositiveR, NotClassC
from .graph_core import BallProfile, GraphSpace, ball_profile
from .simplex_opt import CLIQUE, SolveResult, instance_from_ball, solve_k, solve_k_tilde
from .spectral_tools import max_clique

SUBSET_CAP = 12
FAMILY_CAP = 10_000


# helpers shared by the bounds

class BallSolver:
    """Memoized K and K-tilde values for targets W inside one ball."""

    def __init__(self, g: GraphSpace, z, weights: dict[int, float] | None = None, mode: str | None = None):
        self.g = g
        self.mode = mode
        self.ball: BallProfile = ball_profile(g, z)
        self.weights = weights
        seeds = g.meta.get("k_seeds", {}).get(g.label(self.ball.center))
        self.seed_map = {g.idx(k): v for k, v in seeds.items()} if seeds else None
        self._k: dict[frozenset, SolveResult] = {}
        self._kt: dict[frozenset, SolveResult] = {}

    def k(self, W) -> SolveResult:
        key = frozenset(W)
        res = self._k.get(key)
        if res is None:
            ws = tuple(w for w in self.ball.sphere2 if w in key)
            inst = instance_from_ball(self.ball, ws, weights=self.weights, seed_map=self.seed_map)
            res = solve_k(inst, self.mode)
            self._k[key] = res
        return res

    def k_tilde(self, W) -> SolveResult:
        key = frozenset(W)
        res = self._kt.get(key)
        if res is None:
            ws = tuple(w for w in self.ball.sphere2 if w in key)
            inst = instance_from_ball(self.ball, ws, tilde=True, weights=self.weights)
            res = solve_k_tilde(inst, None if self.mode == CLIQUE else self.mode)
            self._kt[key] = res
        return res

    def far_pairs(self) -> dict[int, frozenset]:
        """Distance-4 neighborhoods inside S2(z)."""
        s2 = self.ball.sphere2
        return {w: frozenset(u for u in s2 if self.g.d(w, u) == 4) for w in s2}


def _closed_families(nbhd: dict[int, frozenset], universe: frozenset, cap: int) -> tuple[list[frozenset], bool]:
    """All intersections of distance-4 neighborhoods (the closed sides of bicliques)."""
    seen = {universe}
    frontier = [universe]
    capped = False
    while frontier:
        nxt = []
        for A in frontier:
            for w in sorted(universe):
                B = A & nbhd[w]
                if B not in seen:
                    if len(seen) >= cap:
                        capped = True
                        break
                    seen.add(B)
                    nxt.append(B)
            if capped:
                break
        if capped:
            break
        frontier = nxt
    return sorted(seen, key=lambda s: (len(s), sorted(s))), capped


def _bicliques(bs: BallSolver, cap: int = FAMILY_CAP) -> tuple[list[tuple[frozenset, frozenset]], bool]:
    nb = bs.far_pairs()
    universe = frozenset(bs.ball.sphere2)
    fams, capped = _closed_families(nb, universe, cap)
    pairs = []
    for A in fams:
        if not A:
            continue
        B = universe
        for a in A:
            B = B & nb[a]
        if B:
            pairs.append((A, B))
    return pairs, capped


# the four bounds

def k_local(g: GraphSpace, z) -> SolveResult:
    """K(z, S2(z)) for the ball at z."""
    return BallSolver(g, z).k(ball_profile(g, z).sphere2)


def r_local(g: GraphSpace, z, solver: BallSolver | None = None) -> float:
    """-2 log K(z, S2(z)); +inf when S2(z) is empty."""
    bs = solver or BallSolver(g, z)
    k = bs.k(bs.ball.sphere2).value
    return math.inf if k <= 0 else 0.0 - 2.0 * math.log(k)


def r1_local(g: GraphSpace, z, solver: BallSolver | None = None, cap: int = FAMILY_CAP) -> float:
    """4 / sup{1_{V+}/(1-K(z,W+)) + 1_{V-}/(1-K(z,W-))} over admissible families.

    Because K(z, .) is monotone, the supremum is attained either with one side
    carried by an empty W (then the side only needs a vertex of S1 at distance
    2 from the other side's midpoints) or at a maximal biclique of the
    distance-4 graph on S2(z).
    """
    bs = solver or BallSolver(g, z)
    ball = bs.ball
    s1 = ball.sphere1
    if not s1:
        return math.inf

    def term(W) -> float:
        if not W:
            return 1.0
        k = bs.k(W).value
        if k >= 1.0:
            raise KAtLeastOne(k, g.label(ball.center))
        return 1.0 / (1.0 - k)

    best = term(ball.sphere2)
    for v in s1:
        free = [u for u in s1 if u != v and not g.adjacent(u, v)]
        # V- = {v}; V+ any nonempty set of S1 vertices non adjacent to v
        if free:
            best = max(best, 1.0 + term(ball.closure(free)))
    pairs, capped = _bicliques(bs, cap)
    for A, B in pairs:
        best = max(best, term(A) + term(B))
    if capped:
        raise EnumerationCapped(4.0 / best)
    return 4.0 / best


def rbar_local(g: GraphSpace, z, solver: BallSolver | None = None, cap: int = FAMILY_CAP) -> float:
    """4 / sup{1_{W+}/(-log K(z,W+)) + 1_{W-}/(-log K(z,W-))}, W+ and W- at distance 4."""
    bs = solver or BallSolver(g, z)
    ball = bs.ball
    if not ball.sphere2:
        return math.inf
    k_full = bs.k(ball.sphere2).value
    if k_full >= 1.0:
        raise NonPositiveR(-2.0 * math.log(k_full))

    def term(W) -> float:
        return 1.0 / -math.log(bs.k(W).value)

    best = term(ball.sphere2)
    pairs, capped = _bicliques(bs, cap)
    for A, B in pairs:
        best = max(best, term(A) + term(B))
    if capped:
        raise EnumerationCapped(4.0 / best)
    return 4.0 / best


def _greedy_max(value, items) -> float:
    chosen: list[int] = []
    rest = list(items)
    best = value(())
    while rest:
        scores = [(value(tuple(chosen + [w])), w) for w in rest]
        s, w = max(scores)
        chosen.append(w)
        rest.remove(w)
        best = max(best, s)
    return best


def ktilde_sup(g: GraphSpace, z, solver: BallSolver | None = None, cap: int = SUBSET_CAP) -> float:
    """sup over W of K-tilde(z, W); W = empty gives 0.

    For a fixed set of variables ]z,W[ the objective only grows with W, so it
    suffices to scan W(V) = {z'' : ]z,z''[ inside V} for V in S1(z).  Above the
    subset cap the scan is greedy and EnumerationCapped is raised with the
    greedy value.
    """
    bs = solver or BallSolver(g, z)
    ball = bs.ball
    s1, s2 = ball.sphere1, ball.sphere2
    best = 0.0
    if len(s1) <= cap:
        seen = set()
        for r in range(1, len(s1) + 1):
            for V in itertools.combinations(s1, r):
                W = frozenset(ball.closure(V))
                if W and W not in seen:
                    seen.add(W)
                    best = max(best, bs.k_tilde(W).value)
        return best
    if len(s2) <= cap:
        for r in range(1, len(s2) + 1):
            for W in itertools.combinations(s2, r):
                best = max(best, bs.k_tilde(W).value)
        return best
    best = _greedy_max(lambda W: bs.k_tilde(W).value if W else 0.0, s2)
    raise EnumerationCapped(best)


def rtilde2_local(g: GraphSpace, z, solver: BallSolver | None = None, cap: int = SUBSET_CAP) -> float:
    """1 - sup_W K-tilde(z, W)."""
    return 1.0 - ktilde_sup(g, z, solver, cap)


# combinatorial shortcuts

def motzkin_strauss_k(g: GraphSpace, z) -> tuple[float, int, bool]:
    """K(z, S2(z)) = 1 - 1/omega(G*_z) for balls of class C.

    G*_z lives on S1(z) with an edge per midpoint pair.  Raises NotClassC when
    some target does not have exactly two midpoints or two targets share the
    same pair.
    """
    if not g.is_counting or any(r != 1.0 for r in g.rates.values()):
        raise NotClassC("requires the counting measure and unit rates")
    ball = ball_profile(g, z)
    pairs = [tuple(sorted(ball.midpoints[w])) for w in ball.sphere2]
    if any(len(p) != 2 for p in pairs):
        raise NotClassC("a target has a number of midpoints different from two")
    if len(set(pairs)) != len(pairs):
        raise NotClassC("two targets share a midpoint pair")
    adj = {u: set() for u in ball.sphere1}
    for a, b in pairs:
        adj[a].add(b)
        adj[b].add(a)
    omega = max_clique(adj) if adj else 1
    return 1.0 - 1.0 / omega, omega, True


@dataclass
class MidpointDiagnostic:
    small_families: list  # W with |W| <= 2 and |]z,W[| <= |W|
    shared_families: list  # equal-midpoint families with |]z,W[| <= |W|
    all_families: list | None  # every W with |]z,W[| <= |W| (None when not enumerated)

    @property
    def necessary_conditions_hold(self) -> bool:
        return not self.small_families and not self.shared_families


def midpoint_conditions(g: GraphSpace, z, cap: int = SUBSET_CAP) -> MidpointDiagnostic:
    """Check the two midpoint-spreading conditions needed for r(z) > 0.

    Also lists every family W with |]z,W[| <= |W| when S2(z) has at most
    ``cap`` elements (the stronger condition of the open conjecture).
    """
    ball = ball_profile(g, z)
    s2 = ball.sphere2
    lab = g.label

    def mids(W):
        out = set()
        for w in W:
            out.update(ball.midpoints[w])
        return out

    small = []
    for r in (1, 2):
        for W in itertools.combinations(s2, r):
            if len(mids(W)) <= len(W):
                small.append(tuple(lab(w) for w in W))
    groups: dict[tuple, list[int]] = {}
    for w in s2:
        groups.setdefault(tuple(sorted(ball.midpoints[w])), []).append(w)
    shared = [tuple(lab(w) for w in ws) for m, ws in groups.items() if len(m) <= len(ws)]
    full = None
    if len(s2) <= cap:
        full = []
        for r in range(1, len(s2) + 1):
            for W in itertools.combinations(s2, r):
                if len(mids(W)) <= len(W):
                    full.append(tuple(lab(w) for w in W))
    return MidpointDiagnostic(small, shared, full)


# reports

@dataclass
class VertexCurvature:
    label: str
    K: float
    mode: str
    r: float
    r1: float | None
    rbar: float | None
    rtilde2: float | None
    clipped: bool = False
    notes: dict = field(default_factory=dict)


@dataclass
class CurvatureReport:
    graph: str
    vertices: list[VertexCurvature]

    def infimum(self, key: str) -> float | None:
        vals = [getattr(v, key) for v in self.vertices if not v.clipped and getattr(v, key) is not None]
        return min(vals) if vals else None

    @property
    def summary(self) -> dict:
        return {f"inf_{k}": self.infimum(k) for k in ("r", "r1", "rbar", "rtilde2")}

    def to_dict(self) -> dict:
        return {
            "graph": self.graph,
            "summary": {k: tag_number(v) for k, v in self.summary.items()},
            "vertices": [
                {"label": v.label, "K": tag_number(v.K), "mode": v.mode, "r": tag_number(v.r),
                 "r1": tag_number(v.r1), "rbar": tag_number(v.rbar), "rtilde2": tag_number(v.rtilde2),
                 "clipped": v.clipped, "notes": v.notes}
                for v in self.vertices
            ],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "r", "r1", "rbar", "rtilde2", "K", "mode"])
        for v in self.vertices:
            w.writerow([v.label] + [fmt_number(x) for x in (v.r, v.r1, v.rbar, v.rtilde2, v.K)] + [v.mode])
        return buf.getvalue()


def fmt_number(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def tag_number(x):
    """JSON-safe number: floats rounded to 12 significant digits, infinities as strings."""
    if x is None:
        return None
    if isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return float(f"{x:.12g}")


def _tag_tree(obj):
    if isinstance(obj, dict):
        return {str(k): _tag_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_tree(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_tag_tree(v) for v in obj.tolist()]
    if isinstance(obj, (float, int, np.floating, np.integer)) and not isinstance(obj, bool):
        return tag_number(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_tag_tree(obj), sort_keys=True, indent=2)


def vertex_curvature(g: GraphSpace, z, cap: int = SUBSET_CAP, mode: str | None = None) -> VertexCurvature:
    z = g.idx(z)
    bs = BallSolver(g, z, mode=mode)
    kres = bs.k(bs.ball.sphere2)
    r = math.inf if kres.value <= 0 else 0.0 - 2.0 * math.log(kres.value)
    notes: dict = {}
    r1 = rbar = rt2 = None
    try:
        r1 = r1_local(g, z, bs)
    except KAtLeastOne:
        notes["r1"] = "KAtLeastOne"
    except EnumerationCapped as exc:
        r1 = exc.args[0]
        notes["r1"] = "EnumerationCapped"
    try:
        rbar = rbar_local(g, z, bs)
    except NonPositiveR:
        notes["rbar"] = "NonPositiveR"
    except EnumerationCapped as exc:
        rbar = exc.args[0]
        notes["rbar"] = "EnumerationCapped"
    try:
        rt2 = rtilde2_local(g, z, bs, cap)
    except EnumerationCapped as exc:
        rt2 = 1.0 - exc.args[0]
        notes["rtilde2"] = "EnumerationCapped"
    return VertexCurvature(g.label(z), kres.value, kres.mode, r, r1, rbar, rt2, z in g.clipped, notes)


def curvature_report(g: GraphSpace, vertices=None, cap: int = SUBSET_CAP, mode: str | None = None
                     ) -> CurvatureReport:
    """Bounds at every vertex (or the given ones); clipped vertices are reported but skipped in infima."""
    vs = range(g.n) if vertices is None else [g.idx(v) for v in vertices]
    out = []
    for z in vs:
        if z in g.clipped:
            out.append(VertexCurvature(g.label(z), math.nan, "suppressed", math.nan, None, None, None, True,
                                       {"clipped": "2-ball leaves the box"}))
            continue
        out.append(vertex_curvature(g, z, cap, mode))
    return CurvatureReport(g.name, out)
