"""Named graph spaces, Cartesian products and Ising / lattice screening formulas."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BoundaryVertex, TooLarge
from .graph_core import GraphSpace, MoveSet, build_graph_space
from .spectral_tools import gershgorin_dominant, sym_eigs

MAX_HYPERCUBE = 10
MAX_BOX = 4096
MAX_SYMMETRIC = 5


# constructors

def hypercube(n: int, measure=None, generator: str | None = None) -> GraphSpace:
    if n < 0 or n > MAX_HYPERCUBE:
        raise TooLarge(f"hypercube dimension {n} outside 0..{MAX_HYPERCUBE}")
    pts = list(itertools.product((0, 1), repeat=n))
    labels = ["".join(map(str, p)) or "e" for p in pts]
    index = {p: i for i, p in enumerate(pts)}
    edges = []
    moves = {}
    for i in range(n):
        flip = {}
        for p in pts:
            q = list(p)
            q[i] ^= 1
            q = tuple(q)
            flip[labels[index[p]]] = labels[index[q]]
            if p < q:
                edges.append((labels[index[p]], labels[index[q]]))
        moves[f"flip{i}"] = flip
    coords = {i: p for i, p in enumerate(pts)}
    if n == 0:
        return build_graph_space(labels, [], name="hypercube(0)", coords=coords)
    return build_graph_space(labels, edges, measure=measure, generator=generator, moves=moves,
                             coords=coords, name=f"hypercube({n})")


def lattice_box(dims: Sequence[int], measure=None, generator: str | None = None) -> GraphSpace:
    """Box prod_i {0..dims_i - 1} in Z^k; vertices whose 2-ball leaves the box are clipped."""
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or math.prod(dims) > MAX_BOX:
        raise TooLarge(f"box {dims} exceeds {MAX_BOX} vertices")
    pts = list(itertools.product(*(range(d) for d in dims)))
    lab = {p: ",".join(map(str, p)) for p in pts}
    edges, moves = [], {}
    for i in range(len(dims)):
        for sgn in (1, -1):
            mv = {}
            for p in pts:
                q = list(p)
                q[i] += sgn
                q = tuple(q)
                if 0 <= q[i] < dims[i]:
                    mv[lab[p]] = lab[q]
                    if sgn == 1:
                        edges.append((lab[p], lab[q]))
            moves[f"{'+' if sgn > 0 else '-'}e{i}"] = mv
    clipped = [lab[p] for p in pts if any(c < 2 or c > d - 3 for c, d in zip(p, dims))]
    coords = {i: p for i, p in enumerate(pts)}
    return build_graph_space([lab[p] for p in pts], edges, measure=measure, generator=generator,
                             moves=moves, coords=coords, clipped=clipped,
                             name=f"lattice-box({'x'.join(map(str, dims))})", meta={"dims": dims})


def bernoulli_laplace(n: int, m: int) -> GraphSpace:
    """Slice {z in {0,1}^n : |z| = m} with coordinate swaps."""
    if n > 16:
        raise TooLarge("slice too large")
    pts = [p for p in itertools.product((0, 1), repeat=n) if sum(p) == m]
    lab = {p: "".join(map(str, p)) for p in pts}
    edges, moves = [], {}
    for i, j in itertools.combinations(range(n), 2):
        mv = {}
        for p in pts:
            if p[i] != p[j]:
                q = list(p)
                q[i], q[j] = q[j], q[i]
                q = tuple(q)
                mv[lab[p]] = lab[q]
                if p < q:
                    edges.append((lab[p], lab[q]))
        moves[f"swap{i}{j}"] = mv
    return build_graph_space([lab[p] for p in pts], edges, moves=moves,
                             coords={i: p for i, p in enumerate(pts)}, name=f"bernoulli-laplace({n},{m})")


def transposition(n: int) -> GraphSpace:
    """Symmetric group S_n, edges given by composition with transpositions."""
    if n > MAX_SYMMETRIC:
        raise TooLarge(f"S_{n} has more than {math.factorial(MAX_SYMMETRIC)} elements")
    pts = list(itertools.permutations(range(1, n + 1)))
    lab = {p: "".join(map(str, p)) for p in pts}
    edges, moves = [], {}
    for i, j in itertools.combinations(range(n), 2):
        mv = {}
        for p in pts:
            q = list(p)
            q[i], q[j] = q[j], q[i]
            q = tuple(q)
            mv[lab[p]] = lab[q]
            if p < q:
                edges.append((lab[p], lab[q]))
        moves[f"t{i}{j}"] = mv
    return build_graph_space([lab[p] for p in pts], edges, moves=moves, name=f"transposition({n})")


def cycle(n: int) -> GraphSpace:
    labels = [str(i) for i in range(n)]
    return build_graph_space(labels, [(labels[i], labels[(i + 1) % n]) for i in range(n)], name=f"cycle({n})")


def path(n: int) -> GraphSpace:
    labels = [str(i) for i in range(n)]
    return build_graph_space(labels, [(labels[i], labels[i + 1]) for i in range(n - 1)], name=f"path({n})")


def complete(n: int) -> GraphSpace:
    labels = [str(i) for i in range(n)]
    return build_graph_space(labels, list(itertools.combinations(labels, 2)), name=f"complete({n})")


def petersen() -> GraphSpace:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    labels = [str(i) for i in range(10)]
    return build_graph_space(labels, [(str(a), str(b)) for a, b in outer + spokes + inner], name="petersen")


def windmill(m: int = 4, copies: int = 2) -> GraphSpace:
    """``copies`` complete graphs K_m glued at one universal vertex ``h``."""
    labels = ["h"]
    edges = []
    for c in range(copies):
        block = ["h"] + [f"{chr(97 + c)}{i}" for i in range(1, m)]
        labels += block[1:]
        edges += list(itertools.combinations(block, 2))
    return build_graph_space(labels, edges, name=f"windmill({m},{copies})")


def ball_from_midpoints(n1: int, midsets: Sequence[Sequence[int]], name: str = "ball", *,
                        sphere1_edges: Sequence[tuple[int, int]] = (), meta=None) -> GraphSpace:
    """A 2-ball with center ``z``, sphere-1 vertices ``u0..u{n1-1}`` and targets ``w0..``.

    Target j is joined to the sphere-1 vertices listed in ``midsets[j]``, so its
    midpoint set is exactly that list.
    """
    us = [f"u{i}" for i in range(n1)]
    ws = [f"w{j}" for j in range(len(midsets))]
    edges = [("z", u) for u in us]
    for j, ms in enumerate(midsets):
        if not ms:
            raise ValueError(f"target {j} has no midpoint")
        edges += [(us[i], ws[j]) for i in ms]
    edges += [(us[a], us[b]) for a, b in sphere1_edges]
    return build_graph_space(["z"] + us + ws, edges, name=name, meta=meta)


def petal(n: int) -> GraphSpace:
    """n targets sharing two midpoints u0, u1 plus a private third midpoint u_{j+2}.

    The fixed weights (1/4, 1/4, 1/(2n), ...) are attached as an extra starting
    point for the K solver at the center.
    """
    mids = [(0, 1, j + 2) for j in range(n)]
    seed = {"u0": 0.25, "u1": 0.25}
    seed.update({f"u{j + 2}": 1.0 / (2 * n) for j in range(n)})
    return ball_from_midpoints(n + 2, mids, name=f"petal({n})", meta={"k_seeds": {"z": seed}})


def class_c_ball(omega_graph_edges: Sequence[tuple[int, int]], n1: int, name: str = "class-C ball") -> GraphSpace:
    """Ball whose targets have the two-element midpoint sets given by the edges of G*."""
    return ball_from_midpoints(n1, [tuple(e) for e in omega_graph_edges], name=name)


def product_space(g1: GraphSpace, g2: GraphSpace, sep: str = "|") -> GraphSpace:
    """Cartesian product with product measure and the direct-sum generator."""
    labels, idx = [], {}
    for a in range(g1.n):
        for b in range(g2.n):
            idx[(a, b)] = len(labels)
            labels.append(f"{g1.label(a)}{sep}{g2.label(b)}")
    edges, rates = [], {}
    for a in range(g1.n):
        for b in range(g2.n):
            p = labels[idx[(a, b)]]
            for a2 in g1.neighbors(a):
                q = labels[idx[(a2, b)]]
                rates[(p, q)] = g1.rate(a, a2)
                if a < a2:
                    edges.append((p, q))
            for b2 in g2.neighbors(b):
                q = labels[idx[(a, b2)]]
                rates[(p, q)] = g2.rate(b, b2)
                if b < b2:
                    edges.append((p, q))
    measure = np.outer(g1.measure, g2.measure).ravel()
    moves = None
    if g1.moves is not None and g2.moves is not None:
        moves = {}
        for nm, mp in zip(g1.moves.names, g1.moves.maps):
            moves[f"L.{nm}"] = {labels[idx[(a, b)]]: labels[idx[(int(mp[a]), b)]] for a in range(g1.n) for b in range(g2.n)}
        for nm, mp in zip(g2.moves.names, g2.moves.maps):
            moves[f"R.{nm}"] = {labels[idx[(a, b)]]: labels[idx[(a, int(mp[b]))]] for a in range(g1.n) for b in range(g2.n)}
    coords = None
    if g1.coords and g2.coords:
        coords = {idx[(a, b)]: tuple(g1.coords[a]) + tuple(g2.coords[b]) for a in range(g1.n) for b in range(g2.n)}
    clipped = [labels[idx[(a, b)]] for a in range(g1.n) for b in range(g2.n) if a in g1.clipped or b in g2.clipped]
    return build_graph_space(labels, edges, rates=rates, measure=measure, moves=moves, coords=coords,
                             clipped=clipped, name=f"{g1.name}x{g2.name}")


def make_model(kind: str, params: Sequence = ()) -> GraphSpace:
    """Build a named model; ``params`` are the integers after the colon of NAME:PARAMS."""
    p = [int(x) for x in params]
    kind = kind.replace("_", "-")
    if kind == "hypercube":
        return hypercube(*p)
    if kind == "lattice-box":
        return lattice_box(p)
    if kind == "bernoulli-laplace":
        return bernoulli_laplace(*p)
    if kind == "transposition":
        return transposition(*p)
    if kind == "cycle":
        return cycle(*p)
    if kind == "path":
        return path(*p)
    if kind == "petersen":
        return petersen()
    if kind == "windmill":
        return windmill(*(p or (4, 2)))
    if kind == "petal":
        return petal(*p)
    if kind == "complete":
        return complete(*p)
    raise ValueError(f"unknown model {kind!r}")


def parse_model(text: str) -> GraphSpace:
    """NAME:PARAMS syntax, e.g. ``hypercube:3``, ``lattice-box:5,5`` or ``product:hypercube:2*path:3``."""
    name, _, rest = text.partition(":")
    if name == "product":
        parts = rest.split("*")
        g = parse_model(parts[0])
        for part in parts[1:]:
            g = product_space(g, parse_model(part))
        return g
    params = [s for s in rest.replace("x", ",").split(",") if s] if rest else []
    return make_model(name, params)


# Ising / hypercube potentials

@dataclass(frozen=True)
class IsingSpec:
    """Quadratic potential on the cube.

    convention "01": v(z) = sum T_i z_i + 1/2 sum V_ij z_i z_j on {0,1}^n.
    convention "spin": w(s) = -sum T_i s_i - beta/2 sum W_ij s_i s_j on {-1,1}^n.
    """

    T: np.ndarray
    V: np.ndarray
    convention: str = "01"
    beta: float = 1.0

    def __post_init__(self):
        V = np.asarray(self.V, float)
        T = np.asarray(self.T, float)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "T", T)
        if V.shape != (len(T), len(T)):
            raise ValueError("interaction must be n x n")
        if np.max(np.abs(V - V.T), initial=0.0) > 1e-12 or np.any(np.diag(V) != 0):
            raise ValueError("interaction must be symmetric with zero diagonal")
        if self.convention not in ("01", "spin"):
            raise ValueError("convention must be '01' or 'spin'")

    @property
    def n(self) -> int:
        return len(self.T)

    def potential(self, z) -> float:
        z = np.asarray(z, float)
        if self.convention == "spin":
            s = 2 * z - 1
            return float(-self.T @ s - 0.5 * self.beta * s @ self.V @ s)
        return float(self.T @ z + 0.5 * z @ self.V @ z)

    @classmethod
    def from_json(cls, data: dict) -> "IsingSpec":
        if "W" in data:
            W = np.asarray(data["W"], float)
            return cls(np.asarray(data.get("T", np.zeros(len(W))), float), W, "spin", float(data.get("beta", 1.0)))
        V = np.asarray(data["V"], float)
        return cls(np.asarray(data.get("T", np.zeros(len(V))), float), V, "01")


def k_fn(s: float) -> float:
    """k(s) = (e^s - s - 1)/s with k(0) = 0."""
    if s == 0.0:
        return 0.0
    if abs(s) < 1e-5:
        return s / 2 + s * s / 6
    return (math.expm1(s) - s) / s


def ising_hessian(v: IsingSpec | Callable, z, n: int | None = None) -> np.ndarray:
    """Matrix of discrete mixed second differences of v around z (zero diagonal)."""
    f = v.potential if isinstance(v, IsingSpec) else v
    z = np.asarray(z, int)
    n = len(z) if n is None else n
    H = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        vals = {}
        for a, b in itertools.product((0, 1), repeat=2):
            w = z.copy()
            w[i], w[j] = a, b
            vals[(a, b)] = f(w)
        H[i, j] = H[j, i] = vals[(1, 1)] + vals[(0, 0)] - vals[(0, 1)] - vals[(1, 0)]
    return H


def _hessians(v, n: int):
    if isinstance(v, IsingSpec):
        H = ising_hessian(v, np.zeros(n, int))
        # quadratic potentials have a constant Hessian
        yield H
        return
    for z in itertools.product((0, 1), repeat=n):
        yield ising_hessian(v, z, n)


def rho_v(v: IsingSpec | Callable, n: int | None = None) -> float:
    """rho(v) = 1 + lam_min_inf(Hv)/2 - lam_max_inf|Hv|/2 * k(|Hv|_max_inf / 2)."""
    n = v.n if isinstance(v, IsingSpec) else n
    if not isinstance(v, IsingSpec) and n > MAX_HYPERCUBE:
        raise TooLarge("rho(v) enumerates the cube")
    lam_min, lam_abs, hmax = math.inf, -math.inf, 0.0
    for H in _hessians(v, n):
        ev = sym_eigs(H)
        lam_min = min(lam_min, ev[0])
        lam_abs = max(lam_abs, sym_eigs(np.abs(H))[-1])
        hmax = max(hmax, float(np.max(np.abs(H), initial=0.0)))
    return float(1.0 + lam_min / 2 - lam_abs / 2 * k_fn(hmax / 2))


def rho_tilde(W, beta: float) -> float:
    """1 - 2 beta lam_max(W) - 2 beta lam_max|W| k(2 beta |W|_max)."""
    W = np.asarray(W, float)
    lam = sym_eigs(W)[-1]
    lam_abs = sym_eigs(np.abs(W))[-1]
    wmax = float(np.max(np.abs(W), initial=0.0))
    return float(1.0 - 2 * beta * lam - 2 * beta * lam_abs * k_fn(2 * beta * wmax))


def cube_curvature_consequences(rho: float, n: int) -> dict:
    """Lower bounds on the hypercube curvatures implied by a rho value."""
    if rho <= 0:
        return {"r": -2 * math.log(1 - rho)}
    return {"r": -2 * math.log(1 - rho / n), "r1": 4 * rho / n, "ttilde": 2 * rho / n * (1 - rho / (2 * n)),
            "rbar": 4 * rho / n, "rtilde2": rho}


def sk_sample(n: int, seed: int = 0) -> np.ndarray:
    """Symmetric Gaussian interaction with zero diagonal, entries N(0, 1/n)."""
    rng = np.random.default_rng(seed)
    A = rng.normal(scale=1 / math.sqrt(n), size=(n, n))
    W = np.triu(A, 1)
    return W + W.T


def curie_weiss(n: int) -> np.ndarray:
    return np.ones((n, n)) - np.eye(n)


# lattice potentials

def lattice_av(g: GraphSpace, v, z) -> dict:
    """Av(z) and the K^v bounds it certifies at an interior box vertex.

    a_ii = min over the two directions of Dv(z, z +- 2 e_i); a_ij = max over
    the four sign choices of -Dv(z, z + e_i e_i + e_j e_j).
    """
    coords = g.coords
    z = g.idx(z)
    if coords is None:
        raise BoundaryVertex("graph has no coordinates")
    pos = {c: i for i, c in coords.items()}
    vv = np.asarray([v[g.label(i)] for i in range(g.n)] if isinstance(v, dict) else v, float)
    c = np.asarray(coords[z])
    k = len(c)

    def at(delta):
        key = tuple(c + delta)
        if key not in pos:
            raise BoundaryVertex(g.label(z))
        return vv[pos[key]]

    def unit(i, s):
        e = np.zeros(k, int)
        e[i] = s
        return e

    def dv(a, b):
        # two-step target z + a + b through the midpoints z + a, z + b
        if np.array_equal(a, b):
            return at(2 * a) + vv[z] - 2 * at(a)
        return at(a + b) + vv[z] - at(a) - at(b)

    A = np.zeros((k, k))
    for i in range(k):
        a_ii = min(dv(unit(i, s), unit(i, s)) for s in (1, -1))
        A[i, i] = math.exp(-a_ii / 2) - 1
    for i, j in itertools.combinations(range(k), 2):
        a_ij = max(-dv(unit(i, s), unit(j, t)) for s in (1, -1) for t in (1, -1))
        A[i, j] = A[j, i] = math.exp(a_ij / 2) - 1
    lam = float(sym_eigs(A)[-1])
    out = {"Av": A, "lambda_max": lam, "dominant": gershgorin_dominant(-A)}
    if lam <= 0:
        out["K_bound"] = 1 + lam / k
        out["Ktilde_bound"] = 1 + lam
    return out
