"""Potentials: perturbed spaces, discrete Laplacians along geodesics and the K^v programs."""

from __future__ import annotations

import math

import numpy as np

from .bridge_transport import binomial_weight, dirac_bridge, integrate_qt
from .errors import DistanceBelowTwo, DistanceNotTwo
from .graph_core import GraphSpace, ball_profile, build_graph_space, interval
from .simplex_opt import SolveResult, instance_from_ball, solve_k, solve_k_tilde


def potential_vector(g: GraphSpace, v) -> np.ndarray:
    if isinstance(v, dict):
        return np.array([float(v[g.label(i)]) for i in range(g.n)])
    if callable(v):
        if g.coords is None:
            raise ValueError("callable potentials need vertex coordinates")
        return np.array([float(v(np.asarray(g.coords[i]))) for i in range(g.n)])
    out = np.asarray(v, float)
    if out.shape != (g.n,) or not np.all(np.isfinite(out)):
        raise ValueError("potential must be finite on every vertex")
    return out


def perturbed_space(g: GraphSpace, v) -> GraphSpace:
    """Measure e^{-v} m with rates L_v(x,y) = e^{(v(x)-v(y))/2} L(x,y)."""
    v = potential_vector(g, v)
    rates = {(g.label(x), g.label(y)): math.exp((v[x] - v[y]) / 2) * r for (x, y), r in g.rates.items()}
    edges = [(g.label(x), g.label(y)) for x, y in g.edges()]
    return build_graph_space(g.vertices, edges, rates=rates, measure=np.exp(-v) * g.measure,
                             moves=g.moves, coords=g.coords, clipped=g.clipped, name=f"{g.name}[v]", meta=g.meta)


def discrete_laplacian(g: GraphSpace, v, z, w) -> float:
    """Dv(z,w) = sum over midpoints u of (v(w) + v(z) - 2v(u)) ell(z,u,w)."""
    v = potential_vector(g, v)
    z, w = g.idx(z), g.idx(w)
    if g.d(z, w) != 2:
        raise DistanceNotTwo(f"d({g.label(z)},{g.label(w)}) = {g.d(z, w)}")
    gz = g.geo_row(z)
    total = 0.0
    for u in g.neighbors(z):
        if g.adjacent(u, w):
            total += (v[w] + v[z] - 2 * v[u]) * g.rate(z, u) * g.rate(u, w) / gz[w]
    return float(total)


def _geodesic_pairs(g: GraphSpace, x: int, y: int):
    """Ordered pairs (z, w) in [x,y] with d(z,w) = 2 along a geodesic from x to y."""
    d = g.d(x, y)
    dx, dy = g.dist_row(x), g.dist_row(y)
    iv = sorted(interval(g, x, y))
    for z in iv:
        for w in iv:
            if dx[w] == dx[z] + 2 and g.d(z, w) == 2:
                yield z, w, int(dx[z])


def dtv_polynomial(g: GraphSpace, v, x, y):
    """Return the coefficients needed to evaluate D_t v(x,y) at any t."""
    v = potential_vector(g, v)
    x, y = g.idx(x), g.idx(y)
    d = g.d(x, y)
    if d < 2:
        raise DistanceBelowTwo(f"d = {d}")
    gx, gy = g.geo_row(x), g.geo_row(y)
    terms: dict[int, float] = {}
    for z, w, k in _geodesic_pairs(g, x, y):
        l2 = g.geo_row(z)[w]
        r = gx[z] * gy[w] / gx[y]
        terms[k] = terms.get(k, 0.0) + discrete_laplacian(g, v, z, w) * l2 * r
    return d, terms


def dtv(g: GraphSpace, v, x, y, t: float) -> float:
    """D_t v(x,y) = sum Dv(z,w) L^2(z,w) r(x,z,w,y) rho_t^{d-2}(d(x,z))."""
    d, terms = dtv_polynomial(g, v, x, y)
    return float(sum(c * binomial_weight(d - 2, k, t) for k, c in terms.items()))


def second_derivative(g: GraphSpace, v, x, y, t: float) -> float:
    """R''(t) for R(t) = int v dnu_t^{x,y}; zero when d(x,y) < 2."""
    x, y = g.idx(x), g.idx(y)
    d = g.d(x, y)
    if d < 2:
        return 0.0
    return d * (d - 1) * dtv(g, v, x, y, t)


def bridge_potential(g: GraphSpace, v, x, y, t: float) -> float:
    """R(t) = sum_z v(z) nu_t^{x,y}(z)."""
    return float(potential_vector(g, v) @ dirac_bridge(g, x, y, t))


def perturbation_cost(g: GraphSpace, v, x, y, t: float) -> float:
    """c^v_t(x,y) = d(d-1) int_0^1 D_s v(x,y) q_t(s) ds (0 when d < 2)."""
    x, y = g.idx(x), g.idx(y)
    d = g.d(x, y)
    if d < 2:
        return 0.0
    d, terms = dtv_polynomial(g, v, x, y)

    def integrand(s):
        s = np.asarray(s, float)
        return sum(c * math.comb(d - 2, k) * s ** k * (1 - s) ** (d - 2 - k) for k, c in terms.items())

    return d * (d - 1) * integrate_qt(integrand, t, nodes=max(64, d))


def averaged_dtv(g: GraphSpace, v, x, y, t: float) -> float:
    """int_0^1 D_s v(x,y) q_t(s) ds."""
    d = g.d(g.idx(x), g.idx(y))
    return perturbation_cost(g, v, x, y, t) / (d * (d - 1))


def perturbed_k(g: GraphSpace, v, z, W=None, tilde: bool = False) -> SolveResult:
    """K^v(z,W) (or its tilde form): the base program with coefficients scaled by e^{-Dv/2}."""
    vv = potential_vector(g, v)
    ball = ball_profile(g, z)
    W = ball.sphere2 if W is None else tuple(g.idx(w) for w in W)
    weights = {w: math.exp(-discrete_laplacian(g, vv, ball.center, w) / 2) for w in W}
    inst = instance_from_ball(ball, W, tilde=tilde, weights=weights)
    return solve_k_tilde(inst) if tilde else solve_k(inst)


__all__ = ["perturbed_space", "discrete_laplacian", "dtv", "second_derivative", "bridge_potential",
           "perturbation_cost", "averaged_dtv", "perturbed_k", "potential_vector"]
