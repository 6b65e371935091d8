"""Finite graph spaces (X, d, L, m).

Vertices are string labels kept in input order; every routine works on the
integer index of a vertex but accepts labels as well.  Distances come from a
breadth-first search (scipy's csgraph, unweighted) and are cached as a dense
matrix for graphs with at most 4096 vertices.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import (
    AxiomViolated,
    NotConnected,
    NotCyclicallyMonotone,
    NotReversible,
    SelfLoop,
    UnknownVertex,
    ZeroRateOnEdge,
)

DENSE_DIST_LIMIT = 4096
REVERSIBILITY_RTOL = 1e-12
GENERATORS = ("l0", "l1", "l2")


@dataclass(frozen=True)
class MoveSet:
    """A finite family of total vertex maps, stored as index arrays."""

    names: tuple[str, ...]
    maps: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.maps)

    def active(self, z: int) -> list[int]:
        """Indices of the moves that actually move z."""
        return [k for k, s in enumerate(self.maps) if s[z] != z]


class GraphSpace:
    """Immutable graph space with jump rates and a reversible measure."""

    def __init__(self, vertices, neighbors, rates, measure, *, moves=None, coords=None,
                 clipped=frozenset(), name="graph", meta=None):
        self._vertices = tuple(vertices)
        self._index = {v: i for i, v in enumerate(self._vertices)}
        self._neighbors = tuple(tuple(sorted(nb)) for nb in neighbors)
        self._nbset = tuple(frozenset(nb) for nb in self._neighbors)
        self._rates = dict(rates)
        self._measure = np.asarray(measure, dtype=float)
        self._measure.setflags(write=False)
        self.moves: MoveSet | None = moves
        self.coords: dict[int, tuple] | None = coords
        self.clipped: frozenset[int] = frozenset(clipped)
        self.name = name
        self.meta = dict(meta or {})
        self._dist = None
        self._dist_rows: dict[int, np.ndarray] = {}
        self._geo_rows: dict[int, np.ndarray] = {}
        if self.n <= DENSE_DIST_LIMIT:
            self._dist = self._all_distances()

    # basic accessors
    @property
    def n(self) -> int:
        return len(self._vertices)

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def measure(self) -> np.ndarray:
        return self._measure

    def label(self, i: int) -> str:
        return self._vertices[i]

    def idx(self, x) -> int:
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            if 0 <= x < self.n:
                return int(x)
            raise UnknownVertex(x)
        try:
            return self._index[x]
        except KeyError:
            raise UnknownVertex(x) from None

    def neighbors(self, x) -> tuple[int, ...]:
        return self._neighbors[self.idx(x)]

    def adjacent(self, x: int, y: int) -> bool:
        return y in self._nbset[x]

    def degree(self, x) -> int:
        return len(self._neighbors[self.idx(x)])

    @property
    def max_degree(self) -> int:
        return max(len(nb) for nb in self._neighbors)

    def rate(self, x: int, y: int) -> float:
        return self._rates[(x, y)]

    @property
    def rates(self) -> Mapping[tuple[int, int], float]:
        return self._rates

    def edges(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.n) for y in self._neighbors[x] if x < y]

    @property
    def is_counting(self) -> bool:
        return bool(np.all(self._measure == 1.0))

    @property
    def mu(self) -> np.ndarray:
        """The normalized measure m / m(X)."""
        return self._measure / self._measure.sum()

    # distances
    def _adjacency_csr(self) -> csr_matrix:
        rows = [x for x in range(self.n) for _ in self._neighbors[x]]
        cols = [y for x in range(self.n) for y in self._neighbors[x]]
        return csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))

    def _all_distances(self) -> np.ndarray:
        d = shortest_path(self._adjacency_csr(), unweighted=True, directed=False)
        out = d.astype(np.int64)
        out.setflags(write=False)
        return out

    def dist_row(self, x) -> np.ndarray:
        x = self.idx(x)
        if self._dist is not None:
            return self._dist[x]
        row = self._dist_rows.get(x)
        if row is None:
            d = shortest_path(self._adjacency_csr(), unweighted=True, directed=False, indices=[x])
            row = d[0].astype(np.int64)
            self._dist_rows[x] = row
        return row

    def d(self, x, y) -> int:
        return int(self.dist_row(x)[self.idx(y)])

    @property
    def dist(self) -> np.ndarray:
        if self._dist is None:
            raise MemoryError("dense distance matrix not cached above 4096 vertices")
        return self._dist

    @property
    def diameter(self) -> int:
        if self._dist is not None:
            return int(self._dist.max())
        return max(int(self.dist_row(x).max()) for x in range(self.n))

    def sphere(self, z, k: int) -> tuple[int, ...]:
        row = self.dist_row(z)
        return tuple(int(u) for u in np.flatnonzero(row == k))

    # geodesic weights
    def geo_row(self, x) -> np.ndarray:
        """Row of geodesic weights L^{d(x,y)}(x,y) over all y."""
        x = self.idx(x)
        row = self._geo_rows.get(x)
        if row is not None:
            return row
        dx = self.dist_row(x)
        order = np.argsort(dx, kind="stable")
        w = np.zeros(self.n)
        w[x] = 1.0
        for u in order[1:]:
            du = dx[u]
            s = 0.0
            for p in self._neighbors[u]:
                if dx[p] == du - 1:
                    s += w[p] * self._rates[(p, u)]
            w[u] = s
        w.setflags(write=False)
        self._geo_rows[x] = w
        return w

    def in_interval(self, x: int, u: int, y: int) -> bool:
        return self.d(x, u) + self.d(u, y) == self.d(x, y)

    def __repr__(self) -> str:
        return f"GraphSpace({self.name!r}, n={self.n})"


def _default_generator(measure: np.ndarray, generator: str | None) -> str:
    if generator is None:
        return "l0" if np.all(measure == measure[0]) else "l1"
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}")
    return generator


def generator_rate(kind: str, mx: float, my: float) -> float:
    """Jump rate x -> y of the named generator; reversible for m."""
    if kind == "l0":
        return 1.0
    if kind == "l1":
        return math.sqrt(my / mx)
    return 0.5 * (1.0 + my / mx)


def build_graph_space(vertices: Sequence, edges: Iterable, rates: Mapping | None = None,
                      measure: Mapping | Sequence | None = None, generator: str | None = None,
                      *, moves: Mapping[str, Mapping] | MoveSet | None = None, coords=None,
                      clipped=(), name: str = "graph", meta=None) -> GraphSpace:
    """Validate the data of a graph space and build it.

    ``rates`` maps ordered label pairs to L(x,y); when omitted the generator
    ``generator`` (l0, l1 or l2) is used, defaulting to l0 for a constant
    measure and l1 otherwise.  ``moves`` maps a move name to a label->label
    dict (vertices absent from the dict are fixed).
    """
    labels = [str(v) for v in vertices]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate vertex labels")
    index = {v: i for i, v in enumerate(labels)}
    n = len(labels)
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for a, b in edges:
        try:
            i, j = index[str(a)], index[str(b)]
        except KeyError as exc:
            raise UnknownVertex(exc.args[0]) from None
        if i == j:
            raise SelfLoop(labels[i])
        nbrs[i].add(j)
        nbrs[j].add(i)

    if measure is None:
        m = np.ones(n)
    elif isinstance(measure, Mapping):
        m = np.array([float(measure[v]) for v in labels])
    else:
        m = np.asarray(measure, dtype=float)
    if np.any(m <= 0) or not np.all(np.isfinite(m)):
        raise ValueError("measure must be positive and finite")

    rate_map: dict[tuple[int, int], float] = {}
    if rates is None:
        kind = _default_generator(m, generator)
        for x in range(n):
            for y in nbrs[x]:
                rate_map[(x, y)] = generator_rate(kind, m[x], m[y])
    else:
        for key, val in rates.items():
            a, b = key.split("->") if isinstance(key, str) else key
            i, j = index[str(a)], index[str(b)]
            if j not in nbrs[i]:
                if float(val) != 0.0:
                    raise ValueError(f"rate given on non-edge {a}->{b}")
                continue
            rate_map[(i, j)] = float(val)
        for x in range(n):
            for y in nbrs[x]:
                if rate_map.get((x, y), 0.0) <= 0.0:
                    raise ZeroRateOnEdge(f"{labels[x]}->{labels[y]}")

    if n > 1 and any(not nb for nb in nbrs):
        raise NotConnected("isolated vertex")
    _check_connected(nbrs)
    worst, worst_edge = 0.0, None
    for (x, y), lxy in rate_map.items():
        a, b = m[x] * lxy, m[y] * rate_map[(y, x)]
        defect = abs(a - b) / max(abs(a), abs(b))
        if defect > worst:
            worst, worst_edge = defect, (labels[x], labels[y])
    if worst > REVERSIBILITY_RTOL:
        raise NotReversible(worst_edge, worst)

    move_set = None
    if isinstance(moves, MoveSet):
        move_set = moves
    elif moves:
        names, maps = [], []
        for name_, mp in moves.items():
            arr = np.arange(n)
            for a, b in mp.items():
                arr[index[str(a)]] = index[str(b)]
            names.append(str(name_))
            maps.append(arr)
        move_set = MoveSet(tuple(names), tuple(maps))

    clip = frozenset(index[str(c)] if not isinstance(c, int) else c for c in clipped)
    g = GraphSpace(labels, nbrs, rate_map, m, moves=move_set, coords=coords, clipped=clip,
                   name=name, meta=meta)
    return g


def _check_connected(nbrs: list[set[int]]) -> None:
    n = len(nbrs)
    if n == 0:
        raise NotConnected("empty graph")
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in nbrs[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != n:
        raise NotConnected(f"{n - len(seen)} vertices unreachable from the first vertex")


def graph_from_json(data: Mapping | str, generator: str | None = None) -> GraphSpace:
    """Build a graph space from the JSON exchange format (dict or file path)."""
    if isinstance(data, str):
        with open(data) as fh:
            data = json.load(fh)
    return build_graph_space(data["vertices"], data["edges"], rates=data.get("rates"),
                             measure=data.get("measure"), generator=generator,
                             moves=data.get("moves"), name=data.get("name", "graph"))


def with_measure(g: GraphSpace, measure, generator: str | None = None) -> GraphSpace:
    """Same graph and moves, new measure and generator."""
    edges = [(g.label(x), g.label(y)) for x, y in g.edges()]
    return build_graph_space(g.vertices, edges, measure=np.asarray(measure, float), generator=generator,
                             moves=g.moves, coords=g.coords, clipped=g.clipped, name=g.name, meta=g.meta)


# geodesics and intervals

def geodesic_weight(g: GraphSpace, x, y) -> float:
    """Sum over geodesics from x to y of the product of jump rates."""
    return float(g.geo_row(x)[g.idx(y)])


def interval(g: GraphSpace, x, y) -> frozenset[int]:
    x, y = g.idx(x), g.idx(y)
    dx, dy = g.dist_row(x), g.dist_row(y)
    return frozenset(int(u) for u in np.flatnonzero(dx + dy == dx[y]))


def bridge_ratio(g: GraphSpace, x: int, z: int, v: int, y: int) -> float:
    """L^{d(x,z)}(x,z) L^{d(v,y)}(v,y) / L^{d(x,y)}(x,y)."""
    return g.geo_row(x)[z] * g.geo_row(v)[y] / g.geo_row(x)[y]


@dataclass(frozen=True)
class BallProfile:
    center: int
    sphere1: tuple[int, ...]
    sphere2: tuple[int, ...]
    midpoints: dict[int, tuple[int, ...]]
    rate_in: dict[int, float]  # L(z, z')
    rate_out: dict[tuple[int, int], float]  # L(z', z'')
    l2: dict[int, float]  # L^2(z, z'')
    ell: dict[tuple[int, int], float]  # (z', z'') -> ell(z, z', z'')

    def closure(self, allowed: Iterable[int]) -> tuple[int, ...]:
        """All z'' whose midpoint set lies inside ``allowed``."""
        a = set(allowed)
        return tuple(w for w in self.sphere2 if a.issuperset(self.midpoints[w]))


def ball_profile(g: GraphSpace, z) -> BallProfile:
    z = g.idx(z)
    s1 = g.neighbors(z)
    s2 = g.sphere(z, 2)
    s1set = set(s1)
    mids = {w: tuple(u for u in g.neighbors(w) if u in s1set) for w in s2}
    rate_in = {u: g.rate(z, u) for u in s1}
    rate_out, l2, ell = {}, {}, {}
    for w, ms in mids.items():
        tot = 0.0
        for u in ms:
            r = g.rate(u, w)
            rate_out[(u, w)] = r
            tot += rate_in[u] * r
        l2[w] = tot
        for u in ms:
            ell[(u, w)] = rate_in[u] * rate_out[(u, w)] / tot
    return BallProfile(z, s1, s2, mids, rate_in, rate_out, l2, ell)


# moves

def validate_moves(g: GraphSpace, moves: MoveSet | None = None) -> None:
    """Check the four move-set axioms; raise AxiomViolated on the first failure."""
    moves = moves if moves is not None else g.moves
    if moves is None:
        raise AxiomViolated(0, "no move set")
    maps = moves.maps
    for k, s in enumerate(maps):
        if len(s) != g.n:
            raise AxiomViolated(1, f"move {moves.names[k]} is not a total map")
        for z in range(g.n):
            if s[z] != z and not g.adjacent(z, int(s[z])):
                raise AxiomViolated(1, (moves.names[k], g.label(z)))
    for z in range(g.n):
        for zp in g.neighbors(z):
            hits = [k for k, s in enumerate(maps) if s[z] == zp]
            if len(hits) != 1:
                raise AxiomViolated(2, (g.label(z), g.label(zp), len(hits)))
    for z in range(g.n):
        dz = g.dist_row(z)
        for t, tau in enumerate(maps):
            tz = int(tau[z])
            after = [k for k, s in enumerate(maps) if dz[tau[s[z]]] == 2]  # S_z^{.->tau}
            before = [k for k, s in enumerate(maps) if dz[s[tz]] == 2]  # S_z^{tau->.}
            if bool(after) != bool(before):
                raise AxiomViolated(3, (g.label(z), moves.names[t]))
            if not after:
                continue
            cand = {k: [j for j in before if maps[j][tz] == tau[maps[k][z]]] for k in after}
            if _matching_size(cand) < len(after):
                raise AxiomViolated(4, (g.label(z), moves.names[t]))


def _matching_size(cand: dict[int, list[int]]) -> int:
    match: dict[int, int] = {}

    def augment(k, seen):
        for j in cand[k]:
            if j in seen:
                continue
            seen.add(j)
            if j not in match or augment(match[j], seen):
                match[j] = k
                return True
        return False

    return sum(augment(k, set()) for k in cand)


def moves_commute(g: GraphSpace, moves: MoveSet | None = None) -> bool:
    moves = moves if moves is not None else g.moves
    return all(np.array_equal(a[b], b[a]) for a in moves.maps for b in moves.maps)


# cyclically monotone sets

@dataclass(frozen=True)
class CyclicSet:
    pairs: tuple[tuple[int, int], ...]
    zset: frozenset[int]
    forward: frozenset[tuple[int, int]]  # C->(S)
    v_fwd: dict[int, tuple[int, ...]]
    v_bwd: dict[int, tuple[int, ...]]
    vv_fwd: dict[int, tuple[int, ...]]
    vv_bwd: dict[int, tuple[int, ...]]

    @property
    def backward(self) -> frozenset[tuple[int, int]]:
        return frozenset((w, z) for z, w in self.forward)


def _cycle_violation(g: GraphSpace, cyc: Sequence[tuple[int, int]]) -> bool:
    k = len(cyc)
    lhs = sum(g.d(x, y) for x, y in cyc)
    rhs = sum(g.d(cyc[i][0], cyc[(i + 1) % k][1]) for i in range(k))
    return lhs > rhs


def cyclic_set(g: GraphSpace, pairs, *, exhaustive_size: int = 4, random_tuples: int = 200,
               seed: int = 0) -> CyclicSet:
    """Check d-cyclic monotonicity (sampled beyond 4-tuples) and derive the index sets."""
    prs = tuple(dict.fromkeys((g.idx(x), g.idx(y)) for x, y in pairs))
    for k in range(2, min(exhaustive_size, len(prs)) + 1):
        for combo in itertools.combinations(prs, k):
            first, rest = combo[0], combo[1:]
            for perm in itertools.permutations(rest):
                cyc = (first,) + perm
                if _cycle_violation(g, cyc):
                    raise NotCyclicallyMonotone([(g.label(a), g.label(b)) for a, b in cyc])
    if len(prs) > exhaustive_size:
        rng = random.Random(seed)
        for _ in range(random_tuples):
            k = rng.randint(exhaustive_size + 1, min(len(prs), 12))
            cyc = rng.sample(prs, k)
            if _cycle_violation(g, cyc):
                raise NotCyclicallyMonotone([(g.label(a), g.label(b)) for a, b in cyc])

    zset: set[int] = set()
    fwd: set[tuple[int, int]] = set()
    for x, y in prs:
        iv = sorted(interval(g, x, y))
        zset.update(iv)
        dxy = g.d(x, y)
        for z in iv:
            for w in iv:
                if z != w and g.d(x, z) + g.d(z, w) + g.d(w, y) == dxy:
                    fwd.add((z, w))
    v_fwd, v_bwd, vv_fwd, vv_bwd = {}, {}, {}, {}
    for z in sorted(zset):
        v_fwd[z] = tuple(u for u in g.neighbors(z) if (z, u) in fwd)
        v_bwd[z] = tuple(u for u in g.neighbors(z) if (u, z) in fwd)
        s2 = g.sphere(z, 2)
        vv_fwd[z] = tuple(w for w in s2 if (z, w) in fwd)
        vv_bwd[z] = tuple(w for w in s2 if (w, z) in fwd)
    return CyclicSet(prs, frozenset(zset), frozenset(fwd), v_fwd, v_bwd, vv_fwd, vv_bwd)


# subsets

def is_convex(g: GraphSpace, subset) -> bool:
    sub = {g.idx(u) for u in subset}
    return all(interval(g, x, y) <= sub for x in sub for y in sub if x < y)


def restrict(g: GraphSpace, subset, name: str | None = None) -> GraphSpace:
    """Induced graph space on ``subset`` keeping the measure and the rates."""
    keep = sorted({g.idx(u) for u in subset})
    pos = {u: i for i, u in enumerate(keep)}
    nbrs = [[pos[w] for w in g.neighbors(u) if w in pos] for u in keep]
    rates = {(pos[x], pos[y]): g.rate(x, y) for x in keep for y in g.neighbors(x) if y in pos}
    _check_connected([set(nb) for nb in nbrs])
    coords = {pos[u]: g.coords[u] for u in keep} if g.coords else None
    return GraphSpace([g.label(u) for u in keep], nbrs, rates, g.measure[keep], coords=coords,
                      name=name or f"{g.name}|restricted")
