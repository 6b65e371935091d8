"""Zero-temperature bridges, W1-optimal couplings, entropy and transport costs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import MarginalsNotNormalized, MissingMoves, NoConvergence
from .graph_core import GraphSpace, bridge_ratio, interval

MASS_TOL = 1e-12
GL_NODES = 64


# measures

def as_measure(g: GraphSpace, nu) -> np.ndarray:
    """Dense weight vector from a label->weight map, an index->weight map or an array."""
    if isinstance(nu, Mapping):
        out = np.zeros(g.n)
        for k, w in nu.items():
            out[g.idx(k)] += float(w)
        return out
    out = np.asarray(nu, dtype=float)
    if out.shape != (g.n,):
        raise ValueError(f"measure has shape {out.shape}, expected ({g.n},)")
    return out


def dirac(g: GraphSpace, x) -> np.ndarray:
    out = np.zeros(g.n)
    out[g.idx(x)] = 1.0
    return out


def measure_to_dict(g: GraphSpace, nu: np.ndarray, drop_zero: bool = True) -> dict[str, float]:
    return {g.label(i): float(w) for i, w in enumerate(nu) if not (drop_zero and w == 0)}


def relative_entropy(nu, m) -> float:
    """sum nu log(nu/m) with 0 log 0 = 0; +inf when nu charges a point where m vanishes."""
    nu = np.asarray(nu, float)
    m = np.asarray(m, float)
    pos = nu > 0
    if np.any(m[pos] <= 0):
        return math.inf
    return float(np.sum(nu[pos] * np.log(nu[pos] / m[pos])))


# bridges

def binomial_weight(d: int, k: int, t: float) -> float:
    """rho_t^d(k) = C(d,k) t^k (1-t)^(d-k), exact at t in {0, 1}."""
    if k < 0 or k > d:
        return 0.0
    return math.comb(d, k) * (t ** k) * ((1.0 - t) ** (d - k))


def dirac_bridge(g: GraphSpace, x, y, t: float) -> np.ndarray:
    """nu_t^{x,y}(z) = 1_[x,y](z) r(x,z,z,y) rho_t^{d(x,y)}(d(x,z))."""
    x, y = g.idx(x), g.idx(y)
    out = np.zeros(g.n)
    d = g.d(x, y)
    if t == 0.0 or d == 0:
        out[x] = 1.0
        return out
    if t == 1.0:
        out[y] = 1.0
        return out
    dx = g.dist_row(x)
    for z in interval(g, x, y):
        out[z] = bridge_ratio(g, x, z, z, y) * binomial_weight(d, int(dx[z]), t)
    return out


@dataclass
class Coupling:
    """Joint law on vertex pairs stored sparsely; values may be floats or Fractions."""

    n: int
    plan: dict[tuple[int, int], float] = field(default_factory=dict)
    cost: float | None = None

    @property
    def first(self) -> np.ndarray:
        out = np.zeros(self.n)
        for (x, _), p in self.plan.items():
            out[x] += float(p)
        return out

    @property
    def second(self) -> np.ndarray:
        out = np.zeros(self.n)
        for (_, y), p in self.plan.items():
            out[y] += float(p)
        return out

    def forward(self, x: int) -> dict[int, float]:
        """pi_->(.|x)."""
        row = {y: float(p) for (a, y), p in self.plan.items() if a == x and p}
        s = sum(row.values())
        return {y: p / s for y, p in row.items()} if s else {}

    def backward(self, y: int) -> dict[int, float]:
        """pi_<-(.|y)."""
        col = {x: float(p) for (x, b), p in self.plan.items() if b == y and p}
        s = sum(col.values())
        return {x: p / s for x, p in col.items()} if s else {}

    def items(self):
        return ((x, y, float(p)) for (x, y), p in self.plan.items() if p)

    def to_dict(self, g: GraphSpace) -> dict:
        return {"plan": [[g.label(x), g.label(y), p] for x, y, p in sorted(self.items())],
                "cost": None if self.cost is None else float(self.cost)}

    @classmethod
    def dirac(cls, n: int, x: int, y: int) -> "Coupling":
        return cls(n, {(x, y): 1.0})

    @classmethod
    def identity(cls, nu: np.ndarray) -> "Coupling":
        return cls(len(nu), {(i, i): float(w) for i, w in enumerate(nu) if w > 0}, 0.0)


def mixture_bridge(g: GraphSpace, coupling: Coupling, t: float) -> np.ndarray:
    """Mixture of Dirac bridges weighted by the coupling."""
    out = np.zeros(g.n)
    for x, y, p in coupling.items():
        out += p * dirac_bridge(g, x, y, t)
    return out


# exact transportation simplex

def transport_lp(supply: Sequence, demand: Sequence, cost: Sequence[Sequence], max_iter: int = 100_000
                 ) -> tuple[dict[tuple[int, int], object], object]:
    """Minimum-cost transport plan between two mass vectors of equal total.

    Works over any ordered field (floats or Fractions).  Starts from the
    northwest-corner basis, pivots on the first cell with negative reduced cost
    and leaves on the smallest-index blocking cell.  Returns the plan on the
    basis cells and its cost.
    """
    m, n = len(supply), len(demand)
    exact = all(isinstance(v, (int, Fraction)) for v in list(supply) + list(demand))
    tol = 0 if exact else 1e-12 * max(1.0, max(abs(float(c)) for row in cost for c in row))
    zero = supply[0] * 0
    a, b = list(supply), list(demand)
    flow: dict[tuple[int, int], object] = {}
    i = j = 0
    while True:
        q = a[i] if a[i] <= b[j] else b[j]
        flow[(i, j)] = q
        if i == m - 1 and j == n - 1:
            break
        if a[i] <= b[j] and i < m - 1:
            b[j] -= q
            a[i] = zero
            i += 1
        else:
            a[i] -= q
            b[j] = zero
            j += 1

    for _ in range(max_iter):
        u, v = _duals(flow, cost, m, n, zero)
        enter = None
        for r in range(m):
            for c in range(n):
                if (r, c) not in flow and cost[r][c] - u[r] - v[c] < -tol:
                    enter = (r, c)
                    break
            if enter:
                break
        if enter is None:
            total = sum((flow[k] * cost[k[0]][k[1]] for k in flow), zero)
            return flow, total
        cyc = _cycle(flow, enter, m)
        minus = cyc[1::2]
        theta = min(flow[k] for k in minus)
        leave = min(k for k in minus if flow[k] == theta)
        for s, k in enumerate(cyc):
            if k == enter:
                continue
            flow[k] = flow[k] + theta if s % 2 == 0 else flow[k] - theta
        flow[enter] = theta
        del flow[leave]
    raise NoConvergence("transportation simplex iteration limit")


def _duals(flow, cost, m, n, zero):
    u = [None] * m
    v = [None] * n
    rows: dict[int, list[int]] = {}
    cols: dict[int, list[int]] = {}
    for r, c in flow:
        rows.setdefault(r, []).append(c)
        cols.setdefault(c, []).append(r)
    u[0] = zero
    stack = [("r", 0)]
    while stack:
        kind, k = stack.pop()
        if kind == "r":
            for c in rows.get(k, ()):
                if v[c] is None:
                    v[c] = cost[k][c] - u[k]
                    stack.append(("c", c))
        else:
            for r in cols.get(k, ()):
                if u[r] is None:
                    u[r] = cost[r][k] - v[k]
                    stack.append(("r", r))
    return u, v


def _cycle(flow, enter, m):
    """Cells of the pivot cycle, starting with the entering cell (signs alternate +,-,...)."""
    # tree nodes: rows 0..m-1, columns m..m+n-1; path from column of enter to its row
    adj: dict[int, list[tuple[int, tuple[int, int]]]] = {}
    for r, c in flow:
        adj.setdefault(r, []).append((m + c, (r, c)))
        adj.setdefault(m + c, []).append((r, (r, c)))
    start, goal = m + enter[1], enter[0]
    prev = {start: None}
    queue = [start]
    for node in queue:
        if node == goal:
            break
        for nxt, cell in adj.get(node, ()):
            if nxt not in prev:
                prev[nxt] = (node, cell)
                queue.append(nxt)
    cells = []
    node = goal
    while prev[node] is not None:
        node, cell = prev[node]
        cells.append(cell)
    # cells run from the entering row back to the entering column
    return [enter] + cells


def _support(nu) -> list[int]:
    return [i for i, w in enumerate(nu) if w > 0]


def _check_probability(nu) -> None:
    tot = sum(nu)
    if isinstance(tot, (int, Fraction)):
        if tot != 1:
            raise MarginalsNotNormalized(f"total mass {tot}")
    elif abs(float(tot) - 1.0) > MASS_TOL * max(1, len(nu)):
        raise MarginalsNotNormalized(f"total mass {float(tot)!r}")
    if any(w < 0 for w in nu):
        raise MarginalsNotNormalized("negative mass")


def optimal_coupling(g: GraphSpace, nu0, nu1, cost_fn: Callable[[int], object] | None = None) -> Coupling:
    """Coupling minimizing sum pi(x,y) c(d(x,y)); c defaults to the identity (W1)."""
    nu0 = list(nu0) if not isinstance(nu0, np.ndarray) else [float(w) for w in nu0]
    nu1 = list(nu1) if not isinstance(nu1, np.ndarray) else [float(w) for w in nu1]
    _check_probability(nu0)
    _check_probability(nu1)
    s0, s1 = _support(nu0), _support(nu1)
    c = cost_fn or (lambda d: d)
    C = [[c(int(g.d(x, y))) for y in s1] for x in s0]
    flow, total = transport_lp([nu0[x] for x in s0], [nu1[y] for y in s1], C)
    plan = {(s0[r], s1[k]): p for (r, k), p in flow.items() if p > 0}
    return Coupling(g.n, plan, total)


def w1_coupling(g: GraphSpace, nu0, nu1) -> Coupling:
    """W1-optimal coupling by the exact transportation simplex; ``cost`` is W1."""
    return optimal_coupling(g, nu0, nu1)


def w1_distance(g: GraphSpace, nu0, nu1):
    return w1_coupling(g, nu0, nu1).cost


def optimal_face_support(g: GraphSpace, nu0, nu1, tol: float = 1e-10) -> tuple[list[int], list[int], np.ndarray]:
    """Cells (x, y) charged by at least one W1-optimal coupling.

    One small LP per cell maximizes pi(x, y) over the optimal face, solved
    with scipy's HiGHS.  A coupling is W1-optimal exactly when it lives on
    this set (the union of optimal supports is the tight set of a strictly
    complementary dual pair).
    """
    from scipy.optimize import linprog

    nu0, nu1 = np.asarray(nu0, float), np.asarray(nu1, float)
    s0, s1 = _support(nu0), _support(nu1)
    m, n = len(s0), len(s1)
    C = np.array([[g.d(x, y) for y in s1] for x in s0], float).ravel()
    A = np.zeros((m + n, m * n))
    for i in range(m):
        A[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        A[m + j, j::n] = 1.0
    beq = np.concatenate([nu0[s0], nu1[s1]])
    w = float(w1_coupling(g, nu0, nu1).cost)
    face = np.zeros(m * n, bool)
    for k in range(m * n):
        c = np.zeros(m * n)
        c[k] = -1.0
        res = linprog(c, A_ub=C[None, :], b_ub=[w * (1 + 1e-12) + 1e-12], A_eq=A, b_eq=beq, method="highs")
        face[k] = res.status == 0 and -res.fun > tol
    return s0, s1, face.reshape(m, n)


def selected_coupling(g: GraphSpace, nu0, nu1, max_iter: int = 200_000, tol: float = 1e-14) -> Coupling:
    """The W1-optimal coupling singled out by the zero-temperature limit.

    Among W1-optimal couplings it minimizes the relative entropy with respect
    to the kernel L^d(x,y)(x,y) / d(x,y)!, found by matrix scaling of that
    kernel restricted to the optimal face.
    """
    nu0, nu1 = np.asarray(nu0, float), np.asarray(nu1, float)
    s0, s1, face = optimal_face_support(g, nu0, nu1)
    K = np.array([[g.geo_row(x)[y] / math.factorial(g.d(x, y)) for y in s1] for x in s0]) * face
    a, b = nu0[s0], nu1[s1]
    u, v = np.ones(len(s0)), np.ones(len(s1))
    for _ in range(max_iter):
        u = a / (K @ v)
        v = b / (K.T @ u)
        if np.max(np.abs(u * (K @ v) - a)) < tol:
            break
    P = u[:, None] * K * v[None, :]
    plan = {(s0[i], s1[j]): float(P[i, j]) for i in range(len(s0)) for j in range(len(s1)) if P[i, j] > 0}
    cp = Coupling(g.n, plan)
    cp.cost = sum(p * g.d(x, y) for x, y, p in cp.items())
    return cp


def ipf_coupling(nu0: np.ndarray, nu1: np.ndarray, seed_matrix: np.ndarray, iters: int = 500,
                 tol: float = 1e-13) -> Coupling:
    """Scale a positive matrix on supp(nu0) x supp(nu1) to the prescribed marginals."""
    s0, s1 = _support(nu0), _support(nu1)
    P = np.array(seed_matrix, float).reshape(len(s0), len(s1))
    a, b = np.asarray(nu0)[s0], np.asarray(nu1)[s1]
    for _ in range(iters):
        P *= (a / P.sum(axis=1))[:, None]
        P *= (b / P.sum(axis=0))[None, :]
        if np.max(np.abs(P.sum(axis=1) - a)) < tol:
            break
    return Coupling(len(nu0), {(s0[i], s1[j]): float(P[i, j]) for i in range(len(s0)) for j in range(len(s1))
                               if P[i, j] > 0})


def random_couplings(nu0, nu1, count: int, seed: int = 0) -> list[Coupling]:
    rng = np.random.default_rng(seed)
    nu0, nu1 = np.asarray(nu0, float), np.asarray(nu1, float)
    k0, k1 = len(_support(nu0)), len(_support(nu1))
    out = [ipf_coupling(nu0, nu1, np.outer(nu0[_support(nu0)], nu1[_support(nu1)]))]
    for _ in range(count - 1):
        out.append(ipf_coupling(nu0, nu1, rng.exponential(size=(k0, k1)) ** 3))
    return out


# cost kernels

def _check_unit(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")


def q_kernel(t: float, s):
    """q_t(s) = 2s/t on [0,t] and 2(1-s)/(1-t) on [t,1]."""
    s = np.asarray(s, float)
    return np.where(s <= t, 2 * s / t, 2 * (1 - s) / (1 - t))


@lru_cache(maxsize=8)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def integrate_qt(fn: Callable[[np.ndarray], np.ndarray], t: float, nodes: int = GL_NODES) -> float:
    """int_0^1 fn(s) q_t(s) ds by Gauss-Legendre on [0,t] and [t,1].

    Exact for polynomial integrands of degree < 2*nodes - 1 (the integrands
    used here are polynomials because rho_s^d(k)/(s(1-s)) is expanded
    before evaluation).
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    x, w = _leggauss(nodes)
    total = 0.0
    for lo, hi in ((0.0, t), (t, 1.0)):
        s = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        total += 0.5 * (hi - lo) * float(np.sum(w * fn(s) * q_kernel(t, s)))
    return total


def rho_over_st(d: int, k: int, s):
    """rho_s^d(k)/(s(1-s)) for 1 <= k <= d-1, evaluated as C(d,k) s^(k-1) (1-s)^(d-k-1)."""
    s = np.asarray(s, float)
    return math.comb(d, k) * s ** (k - 1) * (1 - s) ** (d - k - 1)


def u_cost(t, d: int):
    """u_t(d); vectorized over t."""
    t = np.asarray(t, float)
    if d < 2:
        return np.zeros_like(t)
    if d in (2, 3):
        return np.full_like(t, d * (d - 1) / 2)
    acc = np.full_like(t, float(d * (d - 1)))
    for k in range(2, d - 1):
        acc = acc + math.sqrt(k * (k - 1) * (d - k) * (d - k - 1)) * rho_over_st(d, k, t)
    return acc / 2


def cbar_cost(t: float, d: int) -> float:
    """cbar_t(d) = int_0^1 u_s(d) q_t(s) ds."""
    if d < 2:
        return 0.0
    if d in (2, 3):
        return d * (d - 1) / 2
    return integrate_qt(lambda s: u_cost(s, d), t, nodes=max(GL_NODES, d))


def cbar_star(d: int, variant: str = "closed") -> float:
    """Lower envelope of cbar_t(d) over t.

    ``closed`` is d(d-1) - (d-1)(3/2 + log((d-2)/2)) for d >= 4.  It exceeds
    cbar_t(4) for every t (7.5 against at most 7.25), so ``harmonic``, the
    envelope d(d-1) - (d-1) H_{d-1} obtained without the logarithmic step,
    is the one that really lies below every cbar_t.
    """
    if d < 4:
        return d * (d - 1) / 2
    if variant == "harmonic":
        return d * (d - 1) - (d - 1) * sum(1.0 / j for j in range(1, d))
    if variant != "closed":
        raise ValueError(f"unknown variant {variant!r}")
    return d * (d - 1) - (d - 1) * (1.5 + math.log((d - 2) / 2))


def h_fn(u: float) -> float:
    """h(u) = 2[(1-u)log(1-u) + u] on [0,1], +inf beyond."""
    if u > 1:
        return math.inf
    if u == 1:
        return 2.0
    return 2.0 * ((1 - u) * math.log1p(-u) + u)


def h_t(t: float, u: float) -> float:
    """h_t(u) = (t h(u) - h(tu))/(t(1-t)); t = 0 gives h and t = 1 gives -2log(1-u) - 2u."""
    _check_unit(t)
    if u < 0:
        raise ValueError("h_t is defined for u >= 0")
    if u > 1 or (u == 1 and t == 1):
        return math.inf
    if u < 0.1:
        # 2 sum_{k>=2} u^k (1 + t + ... + t^(k-2)) / (k(k-1)), stable at both ends
        total, uk, geo, tk = 0.0, u * u, 1.0, t
        for k in range(2, 60):
            total += uk * geo / (k * (k - 1))
            uk *= u
            geo += tk
            tk *= t
            if uk < 1e-18 * max(total, 1e-300):
                break
        return 2.0 * total
    if t == 0:
        return h_fn(u)
    if t == 1:
        return -2.0 * math.log1p(-u) - 2.0 * u
    return (t * h_fn(u) - h_fn(t * u)) / (t * (1 - t))


# costs of a coupling

def pi_sigma(g: GraphSpace, coupling: Coupling, moves=None) -> tuple[dict, dict]:
    """Pi^sigma_->(x) and Pi^sigma_<-(y) for every move index, keyed by (vertex, move)."""
    moves = moves if moves is not None else g.moves
    if moves is None:
        raise MissingMoves(g.name)
    fwd: dict[tuple[int, int], float] = {}
    bwd: dict[tuple[int, int], float] = {}
    xs = {x for x, _, _ in coupling.items()}
    ys = {y for _, y, _ in coupling.items()}
    for x in xs:
        ker = coupling.forward(x)
        for k, s in enumerate(moves.maps):
            sx = int(s[x])
            if sx == x:
                continue
            val = 0.0
            for y, p in ker.items():
                d = g.d(x, y)
                if d and g.d(x, sx) + g.d(sx, y) == d:
                    val += p * d * bridge_ratio(g, x, sx, sx, y)
            fwd[(x, k)] = val
    for y in ys:
        ker = coupling.backward(y)
        for k, s in enumerate(moves.maps):
            sy = int(s[y])
            if sy == y:
                continue
            val = 0.0
            for x, p in ker.items():
                d = g.d(x, y)
                if d and g.d(y, sy) + g.d(sy, x) == d:
                    val += p * d * bridge_ratio(g, y, sy, sy, x)
            bwd[(y, k)] = val
    return fwd, bwd


def _tilde_parts(g: GraphSpace, coupling: Coupling) -> tuple[float, float]:
    nu0, nu1 = coupling.first, coupling.second
    fw = sum(nu0[x] * sum(p * g.d(x, y) for y, p in coupling.forward(x).items()) ** 2
             for x in range(g.n) if nu0[x] > 0)
    bw = sum(nu1[y] * sum(p * g.d(x, y) for x, p in coupling.backward(y).items()) ** 2
             for y in range(g.n) if nu1[y] > 0)
    return float(fw), float(bw)


COST_KINDS = ("w1", "w1sq", "t2", "ttilde_fwd", "ttilde_bwd", "ttilde", "ttilde_sum", "t2tilde", "ctilde",
              "tbar", "cbar_star", "cbar_star_harmonic")


def transport_cost(g: GraphSpace, coupling: Coupling, kind: str, t: float | None = None, D: float = 1.0,
                   moves=None) -> float:
    """Evaluate a transport cost of ``coupling``.

    kinds: w1, w1sq (W1 squared), t2 (sum d(d-1)), ttilde_fwd / ttilde_bwd
    (squared mean displacement from either side), ttilde (their max),
    ttilde_sum, t2tilde (move-resolved squares), ctilde (D^2 h_t(Pi/D) with
    h_{1-t} on the backward side; t = 0 uses h and h_1), tbar (cbar_t(d)) and
    cbar_star.
    """
    if kind == "w1":
        return float(sum(p * g.d(x, y) for x, y, p in coupling.items()))
    if kind == "w1sq":
        return float(sum(p * g.d(x, y) for x, y, p in coupling.items())) ** 2
    if kind == "t2":
        return float(sum(p * g.d(x, y) * (g.d(x, y) - 1) for x, y, p in coupling.items()))
    if kind in ("ttilde_fwd", "ttilde_bwd", "ttilde", "ttilde_sum"):
        fw, bw = _tilde_parts(g, coupling)
        return {"ttilde_fwd": fw, "ttilde_bwd": bw, "ttilde": max(fw, bw), "ttilde_sum": fw + bw}[kind]
    if kind == "tbar":
        return float(sum(p * cbar_cost(t, g.d(x, y)) for x, y, p in coupling.items()))
    if kind in ("cbar_star", "cbar_star_harmonic"):
        variant = "harmonic" if kind.endswith("harmonic") else "closed"
        return float(sum(p * cbar_star(g.d(x, y), variant) for x, y, p in coupling.items()))
    if kind in ("t2tilde", "ctilde"):
        fwd, bwd = pi_sigma(g, coupling, moves)
        nu0, nu1 = coupling.first, coupling.second
        if kind == "t2tilde":
            return float(sum(nu0[x] * v * v for (x, _), v in fwd.items())
                         + sum(nu1[y] * v * v for (y, _), v in bwd.items()))
        if t is None:
            raise ValueError("ctilde needs t")
        total = 0.0
        for (x, _), v in fwd.items():
            total += nu0[x] * D * D * h_t(t, v / D)
        for (y, _), v in bwd.items():
            total += nu1[y] * D * D * h_t(1 - t, v / D)
        return float(total)
    raise ValueError(f"unknown cost kind {kind!r}; expected one of {COST_KINDS}")


def cost_infimum(g: GraphSpace, nu0, nu1, kind: str, t: float | None = None, D: float = 1.0,
                 n_random: int = 50, seed: int = 0) -> tuple[float, bool]:
    """inf over couplings of a cost; returns (value, exact).

    Costs linear in the coupling (w1, w1sq, t2, tbar, cbar_star) are solved
    exactly by the transportation simplex.  The weak costs are evaluated at
    the W1-optimal coupling and at ``n_random`` random couplings, and the
    smallest value (an upper bound on the infimum) is returned.
    """
    nu0 = np.asarray(nu0, float)
    nu1 = np.asarray(nu1, float)
    linear = {"w1": lambda d: d, "t2": lambda d: d * (d - 1), "cbar_star": cbar_star,
              "cbar_star_harmonic": lambda d: cbar_star(d, "harmonic"),
              "tbar": lambda d: cbar_cost(t, d)}
    if kind in linear:
        return float(optimal_coupling(g, nu0, nu1, linear[kind]).cost), True
    if kind == "w1sq":
        return float(w1_coupling(g, nu0, nu1).cost) ** 2, True
    cands = [w1_coupling(g, nu0, nu1)] + random_couplings(nu0, nu1, n_random, seed)
    return min(transport_cost(g, c, kind, t, D) for c in cands), False
