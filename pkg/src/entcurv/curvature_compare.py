"""Lin-Lu-Yau curvature of lazy walks and the Bakry-Emery Gamma_2 operator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bridge_transport import transport_lp
from .errors import NoConvergence
from .graph_core import GraphSpace, moves_commute
from .spectral_tools import generator_matrix

ALPHAS = (Fraction(1, 1000), Fraction(1, 2000))
AGREE_TOL = 1e-6
MAX_HALVINGS = 10


@dataclass
class LazyWalk:
    """m_x(y) = alpha/Delta on neighbours, 1 - alpha deg(x)/Delta at x."""

    alpha: Fraction
    rows: dict[int, dict[int, Fraction]]

    def __getitem__(self, x: int) -> dict[int, Fraction]:
        return self.rows[x]


def lazy_walk(g: GraphSpace, alpha, vertices=None) -> LazyWalk:
    alpha = Fraction(alpha)
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    delta = g.max_degree
    vs = range(g.n) if vertices is None else [g.idx(v) for v in vertices]
    rows = {}
    for x in vs:
        row = {y: alpha / delta for y in g.neighbors(x)}
        row[x] = 1 - alpha * g.degree(x) / delta
        rows[x] = row
    return LazyWalk(alpha, rows)


def kappa_alpha(g: GraphSpace, x, y, alpha) -> Fraction:
    """1 - W1(m_x, m_y)/d(x, y), computed exactly over the rationals."""
    x, y = g.idx(x), g.idx(y)
    walk = lazy_walk(g, alpha, [x, y])
    a = sorted(walk[x].items())
    b = sorted(walk[y].items())
    cost = [[g.d(u, v) for v, _ in b] for u, _ in a]
    _, w1 = transport_lp([p for _, p in a], [q for _, q in b], cost)
    return 1 - Fraction(w1) / g.d(x, y)


def lly_curvature(g: GraphSpace, x, y, alphas=ALPHAS) -> float:
    """lim kappa_alpha / alpha as alpha -> 0.

    kappa_alpha is linear in alpha near 0, so two small alphas must give the
    same ratio; otherwise both are halved, at most ten times.
    """
    a1, a2 = (Fraction(a) for a in alphas)
    for _ in range(MAX_HALVINGS + 1):
        v1 = kappa_alpha(g, x, y, a1) / a1
        v2 = kappa_alpha(g, x, y, a2) / a2
        if abs(float(v1 - v2)) <= AGREE_TOL:
            return float(v2)
        a1, a2 = a1 / 2, a2 / 2
    raise NoConvergence(f"kappa_alpha/alpha did not settle on ({g.label(g.idx(x))}, {g.label(g.idx(y))})")


def girth(g: GraphSpace) -> float:
    """Length of a shortest cycle (inf for forests), by BFS from every vertex."""
    best = math.inf
    for s in range(g.n):
        dist = {s: 0}
        parent = {s: -1}
        queue = [s]
        for u in queue:
            for w in g.neighbors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def girth_criterion(g: GraphSpace) -> dict:
    """Whether kappa_LLY(x,y) < (6 - deg x - deg y)/Delta on every edge, next to the girth."""
    delta = g.max_degree
    margins = [(6 - g.degree(x) - g.degree(y)) / delta - lly_curvature(g, x, y) for x, y in g.edges()]
    return {"hypothesis": min(margins) > 0, "min_margin": min(margins), "girth": girth(g)}


# Gamma calculus for the generator of the space

def _generator(g: GraphSpace) -> np.ndarray:
    return -generator_matrix(g, "own")


def carre_du_champ(g: GraphSpace, f, h, Lmat: np.ndarray | None = None) -> np.ndarray:
    """Gamma(f,h)(z) = (1/2) sum_{z'} L(z,z')(f(z')-f(z))(h(z')-h(z))."""
    L = _generator(g) if Lmat is None else Lmat
    f, h = np.asarray(f, float), np.asarray(h, float)
    off = L - np.diag(np.diag(L))
    df = f[None, :] - f[:, None]
    dh = h[None, :] - h[:, None]
    return 0.5 * np.sum(off * df * dh, axis=1)


def gamma2_form(g: GraphSpace, f, h, z=None):
    """Gamma_2(f,h) from 2Gamma_2(f,h) = L Gamma(f,h) - Gamma(f, Lh) - Gamma(h, Lf)."""
    L = _generator(g)
    f, h = np.asarray(f, float), np.asarray(h, float)
    out = 0.5 * (L @ carre_du_champ(g, f, h, L) - carre_du_champ(g, f, L @ h, L) - carre_du_champ(g, h, L @ f, L))
    return out if z is None else float(out[g.idx(z)])


def gamma2(g: GraphSpace, moves, f, z) -> float:
    """Gamma_2(f)(z) from the operator definition.

    When the moves commute the square-sum identity
    2Gamma_2(f)(z) = (1/2) sum_s sum_t (f(ts z) - f(s z) - f(t z) + f(z))^2
    is evaluated too and must agree within 1e-10.
    """
    val = gamma2_form(g, f, f, z)
    moves = moves if moves is not None else g.moves
    if moves is not None and g.is_counting and moves_commute(g, moves):
        alt = gamma2_square_sum(g, moves, f, z)
        if abs(alt - val) > 1e-10 * (1 + abs(val)):
            raise ArithmeticError(f"Gamma_2 routes disagree: {val} vs {alt}")
    return val


def gamma2_square_sum(g: GraphSpace, moves, f, z) -> float:
    f = np.asarray(f, float)
    z = g.idx(z)
    maps = [np.asarray(s) for s in moves.maps]
    total = 0.0
    for s in maps:
        for t in maps:
            total += (f[t[s[z]]] - f[s[z]] - f[t[z]] + f[z]) ** 2
    return 0.25 * total


# comparison table

def compare_table(g: GraphSpace, samples: int = 20, seed: int = 0) -> list[dict]:
    """Per vertex: r, r~2, the smallest incident kappa_LLY and the smallest sampled Gamma_2(f)(z)."""
    from .local_curvature import vertex_curvature

    rng = np.random.default_rng(seed)
    fs = [rng.normal(size=g.n) for _ in range(samples)]
    g2 = np.array([gamma2_form(g, f, f) for f in fs]) if fs else np.zeros((0, g.n))
    lly = {}
    for x, y in g.edges():
        k = lly_curvature(g, x, y)
        lly[x] = min(lly.get(x, math.inf), k)
        lly[y] = min(lly.get(y, math.inf), k)
    rows = []
    for z in range(g.n):
        vc = vertex_curvature(g, z) if z not in g.clipped else None
        rows.append({"vertex": g.label(z), "r": None if vc is None else vc.r,
                     "rtilde2": None if vc is None else vc.rtilde2, "K": None if vc is None else vc.K,
                     "lly_min": lly.get(z), "gamma2_min": float(g2[:, z].min()) if samples else None})
    return rows


__all__ = ["LazyWalk", "lazy_walk", "kappa_alpha", "lly_curvature", "girth", "girth_criterion",
           "carre_du_champ", "gamma2_form", "gamma2", "gamma2_square_sum", "compare_table"]
