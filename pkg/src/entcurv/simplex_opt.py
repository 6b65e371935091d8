"""Maximization of geometric-mean objectives over a probability simplex.

Two objective kinds are supported.

* ``k``: F(a) = sum_w c_w prod_j a_j^{e_wj}, rows of e summing to 2.
* ``ktilde``: G(b) = sum_w c_w prod_j b_j^{e_wj} - sum_{(i,j) in P} sqrt(b_i b_j),
  rows of e summing to 1 and P a symmetric set of ordered pairs (by default
  every ordered pair of distinct variables).

The solver picks a clique reduction when the K-form is a Motzkin-Straus
program, a dense grid (plus polish) for at most four variables, and a
multistart ascent otherwise.  Only the first two modes are exact.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import KAtLeastOne, NonPositiveCoefficient
from .graph_core import BallProfile, CyclicSet, GraphSpace, ball_profile
from .spectral_tools import max_clique

EXACT_GRID = "exact-enumeration"
CLIQUE = "clique-reduction"
MULTISTART = "multistart-ascent"

FLOOR = 1e-12
TOL = 1e-12
MAX_ITER = 10_000
N_STARTS = 64
_CACHE: dict = {}
_CACHE_LIMIT = 200_000


@dataclass(frozen=True, eq=False)
class SimplexInstance:
    n_vars: int
    coeffs: np.ndarray
    exponents: np.ndarray
    kind: str = "k"
    penalty: np.ndarray | None = None
    seeds: tuple[np.ndarray, ...] = ()
    labels: tuple | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        e = np.asarray(self.exponents, dtype=float).reshape(len(c), self.n_vars)
        if self.kind not in ("k", "ktilde", "homog1"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if np.any(c <= 0) or not np.all(np.isfinite(c)):
            raise NonPositiveCoefficient(c[c <= 0].tolist() or c.tolist())
        want = {"k": 2.0, "ktilde": 1.0, "homog1": 1.0}[self.kind]
        if len(c) and np.max(np.abs(e.sum(axis=1) - want)) > 1e-12:
            raise ValueError(f"exponent rows must sum to {want}")
        if np.any(e < 0):
            raise ValueError("negative exponent")
        pen = self.penalty
        if self.kind == "ktilde":
            if pen is None:
                pen = np.ones((self.n_vars, self.n_vars)) - np.eye(self.n_vars)
            pen = np.asarray(pen, dtype=float)
            if not np.array_equal(pen, pen.T):
                raise ValueError("penalty pairs must be symmetric")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "exponents", e)
        object.__setattr__(self, "penalty", pen)
        object.__setattr__(self, "seeds", tuple(np.asarray(s, float) for s in self.seeds))

    @property
    def degree(self) -> float:
        return 2.0 if self.kind == "k" else 1.0

    def key(self):
        pen = None if self.penalty is None else self.penalty.tobytes()
        return (self.kind, self.n_vars, np.round(self.coeffs, 14).tobytes(),
                np.round(self.exponents, 14).tobytes(), pen,
                tuple(s.tobytes() for s in self.seeds))

    def scaled(self, lam: float) -> "SimplexInstance":
        return SimplexInstance(self.n_vars, self.coeffs * lam, self.exponents, self.kind,
                               self.penalty, self.seeds, self.labels)

    # objective and gradient, vectorized over the rows of X
    def _monomials(self, X: np.ndarray) -> np.ndarray:
        E = self.exponents
        with np.errstate(divide="ignore", invalid="ignore"):
            logx = np.log(X)
            terms = logx[:, None, :] * E[None, :, :]
        terms = np.where(E[None, :, :] > 0, terms, 0.0)
        return np.exp(terms.sum(axis=2))  # (S, T)

    def value(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, float))
        if self.n_vars == 0:
            return np.zeros(X.shape[0])
        out = self._monomials(X) @ self.coeffs if len(self.coeffs) else np.zeros(X.shape[0])
        if self.kind == "ktilde":
            r = np.sqrt(X)
            out = out - np.einsum("si,ij,sj->s", r, self.penalty, r)
        return out

    def grad(self, X: np.ndarray) -> np.ndarray:
        P = self._monomials(X) * self.coeffs[None, :]
        g = (P @ self.exponents) / X
        if self.kind == "ktilde":
            r = np.sqrt(X)
            g = g - (r @ self.penalty) / r
        return g


@dataclass
class SolveResult:
    value: float
    argmax: np.ndarray
    mode: str
    certificate: object = None

    @property
    def exact(self) -> bool:
        return self.mode != MULTISTART


# starts and ascent

def _start_points(inst: SimplexInstance, n_starts: int, rng: np.random.Generator) -> np.ndarray:
    n = inst.n_vars
    pts = [np.full(n, 1.0 / n)]
    for j in range(n):
        p = np.full(n, 0.1 / n)
        p[j] += 0.9
        pts.append(p)
    for s in inst.seeds:
        pts.append(s / s.sum())
    while len(pts) < max(n_starts, n + 1 + 16):
        pts.append(rng.dirichlet(np.ones(n)))
    X = np.maximum(np.array(pts), FLOOR)
    return X / X.sum(axis=1, keepdims=True)


def ascend(inst: SimplexInstance, X: np.ndarray, max_iter: int = MAX_ITER, tol: float = TOL) -> np.ndarray:
    """Monotone ascent from each row of X; returns the final points.

    K-forms use the replicator map x_j g_j / (deg F), an ascent direction by
    Jensen's inequality; the K-tilde form uses exponentiated gradient steps
    with a per-row step size.  Rejected steps are damped towards the current
    point until the objective does not decrease.
    """
    X = np.maximum(np.array(X, float), FLOOR)
    X /= X.sum(axis=1, keepdims=True)
    F = inst.value(X)
    live = np.ones(len(X), bool)
    step = np.ones(len(X))
    eg = inst.kind == "ktilde"
    for _ in range(max_iter):
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        Xa, Fa = X[idx], F[idx]
        G = inst.grad(Xa)
        if eg:
            z = step[idx, None] * (G - G.max(axis=1, keepdims=True))
            cand = Xa * np.exp(np.maximum(z, -700.0))
        else:
            cand = Xa * G / (inst.degree * np.maximum(Fa, 1e-300))[:, None]
        cand = np.maximum(cand, FLOOR)
        cand /= cand.sum(axis=1, keepdims=True)
        Fc = inst.value(cand)
        damped = np.zeros(len(idx), bool)
        bad = Fc < Fa
        gamma = 1.0
        for _try in range(40):
            if not bad.any():
                break
            gamma *= 0.5
            damped |= bad
            b = np.flatnonzero(bad)
            mix = Xa[b] + gamma * (cand[b] - Xa[b])
            fm = inst.value(mix)
            cand[b] = mix
            Fc[b] = fm
            bad[b[fm >= Fa[b]]] = False
        keep = Fc >= Fa
        gain = np.where(keep, Fc - Fa, 0.0)
        X[idx[keep]] = cand[keep]
        F[idx[keep]] = Fc[keep]
        small = gain < tol * np.maximum(1.0, np.abs(Fa))
        if eg:
            step[idx] = np.where(damped, np.maximum(step[idx] * 0.5, 1e-10), np.minimum(step[idx] * 1.5, 1e8))
            small &= ~damped | (step[idx] <= 1e-10)
        live[idx[small]] = False
    return X


def _snap(inst: SimplexInstance, X: np.ndarray, thresh: float = 1e-9) -> list[np.ndarray]:
    out = []
    for x in X:
        y = np.where(x < thresh, 0.0, x)
        if y.sum() <= 0:
            continue
        y = y / y.sum()
        out.append(y)
    return out


def _support_key(x: np.ndarray) -> tuple:
    return tuple(np.flatnonzero(x > 0))


def _pick(inst: SimplexInstance, cands: Iterable[np.ndarray]) -> tuple[float, np.ndarray]:
    cands = list(cands)
    A = np.array(cands)
    vals = inst.value(A)
    best = float(vals.max())
    tie = [i for i in range(len(cands)) if vals[i] >= best - 1e-12 * max(1.0, abs(best))]
    i = min(tie, key=lambda k: (_support_key(cands[k]), -vals[k]))
    return float(vals[i]), cands[i]


def _vertices(n: int) -> list[np.ndarray]:
    return [np.eye(n)[j] for j in range(n)]


# mode implementations

def _class_c_pairs(inst: SimplexInstance) -> list[tuple[int, int]] | None:
    if inst.kind != "k":
        return None
    pairs = []
    for c, row in zip(inst.coeffs, inst.exponents):
        nz = np.flatnonzero(row > 0)
        if len(nz) != 2 or abs(c - 2.0) > 1e-12 or np.max(np.abs(row[nz] - 1.0)) > 1e-12:
            return None
        pairs.append((int(nz[0]), int(nz[1])))
    if len(set(pairs)) != len(pairs):
        return None
    return pairs


def _solve_clique(inst: SimplexInstance, pairs) -> SolveResult:
    n = inst.n_vars
    adj = {i: set() for i in range(n)}
    for i, j in pairs:
        adj[i].add(j)
        adj[j].add(i)
    omega, clique = max_clique(adj, return_clique=True)
    x = np.zeros(n)
    x[list(clique)] = 1.0 / omega
    return SolveResult(1.0 - 1.0 / omega, x, CLIQUE, tuple(sorted(clique)))


@functools.lru_cache(maxsize=16)
def _compositions(n: int, N: int) -> np.ndarray:
    """All points of the simplex grid with denominator N (stars and bars)."""
    bars = np.array(list(itertools.combinations(range(N + n - 1), n - 1)), dtype=np.int64).reshape(-1, n - 1)
    edges = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), N + n - 1)])
    out = np.diff(edges, axis=1) - 1
    out.setflags(write=False)
    return out


def _grid_points(n: int, N: int) -> np.ndarray:
    if n == 2:
        a = np.arange(N + 1)
        return np.stack([a, N - a], axis=1) / N
    if n == 3:
        i, j = np.triu_indices(N + 1)
        # points (i, j-i, N-j) for 0 <= i <= j <= N
        return np.stack([i, j - i, N - j], axis=1) / N
    return _compositions(n, N) / N


def _solve_grid(inst: SimplexInstance) -> SolveResult:
    n = inst.n_vars
    step = 1e-3
    if n <= 3:
        pts = _grid_points(n, 1000)
        vals = np.concatenate([inst.value(pts[k:k + 100_000]) for k in range(0, len(pts), 100_000)])
        top = pts[np.argsort(vals)[-16:]]
    else:
        coarse = _grid_points(n, 100)
        vals = inst.value(coarse)
        top_c = coarse[np.argsort(vals)[-8:]]
        offs = np.array(list(itertools.product(range(-10, 11), repeat=n - 1))) * step
        refined = []
        for p in top_c:
            loc = np.empty((len(offs), n))
            loc[:, : n - 1] = p[: n - 1] + offs
            loc[:, n - 1] = 1.0 - loc[:, : n - 1].sum(axis=1)
            loc = loc[np.all(loc >= -1e-12, axis=1)]
            loc = np.maximum(loc, 0.0)
            refined.append(loc)
        refined = np.vstack(refined)
        rv = inst.value(refined)
        top = refined[np.argsort(rv)[-16:]]
    polished = _snap(inst, ascend(inst, top))
    cands = list(top) + polished + _vertices(n)
    value, x = _pick(inst, cands)
    return SolveResult(value, x, EXACT_GRID, {"grid_step": step, "n_vars": n})


def _solve_multistart(inst: SimplexInstance, n_starts: int, seed: int) -> SolveResult:
    rng = np.random.default_rng(seed)
    X0 = _start_points(inst, n_starts, rng)
    X = ascend(inst, X0)
    cands = list(X) + _snap(inst, X) + _vertices(inst.n_vars)
    value, x = _pick(inst, cands)
    return SolveResult(value, x, MULTISTART, {"starts": len(X0)})


def _solve(inst: SimplexInstance, mode: str | None, n_starts: int, seed: int) -> SolveResult:
    n = inst.n_vars
    if n == 0 or len(inst.coeffs) == 0 and inst.kind == "k":
        return SolveResult(0.0, np.full(n, 1.0 / n) if n else np.zeros(0), EXACT_GRID, "empty")
    if n == 1:
        x = np.ones(1)
        return SolveResult(float(inst.value(x)[0]), x, EXACT_GRID, "single variable")
    key = (inst.key(), mode, n_starts, seed)
    hit = _CACHE.get(key)
    if hit is not None:
        return SolveResult(hit.value, hit.argmax.copy(), hit.mode, hit.certificate)
    pairs = _class_c_pairs(inst) if mode in (None, CLIQUE) else None
    if pairs is not None:
        res = _solve_clique(inst, pairs)
    elif mode == EXACT_GRID or (mode is None and n <= 4):
        res = _solve_grid(inst)
    else:
        res = _solve_multistart(inst, n_starts, seed)
    if len(_CACHE) > _CACHE_LIMIT:
        _CACHE.clear()
    _CACHE[key] = res
    return SolveResult(res.value, res.argmax.copy(), res.mode, res.certificate)


def solve_k(inst: SimplexInstance, mode: str | None = None, n_starts: int = N_STARTS,
            seed: int = 0) -> SolveResult:
    """Supremum of a K-form objective over the simplex.

    ``mode`` forces one of the three strategies; by default the clique
    reduction is used when applicable, then the grid for at most four
    variables, then multistart.
    """
    if inst.kind != "k":
        raise ValueError("solve_k expects a K-form instance")
    return _solve(inst, mode, n_starts, seed)


def solve_k_tilde(inst: SimplexInstance, mode: str | None = None, n_starts: int = N_STARTS,
                  seed: int = 0) -> SolveResult:
    """Supremum of a K-tilde objective (geometric means minus the square-root penalty)."""
    if inst.kind != "ktilde":
        raise ValueError("solve_k_tilde expects a ktilde-form instance")
    if mode == CLIQUE:
        raise ValueError("clique reduction only applies to the K-form")
    return _solve(inst, mode, n_starts, seed)


# instances built from balls

def instance_from_ball(ball: BallProfile, W: Sequence[int] | None = None, *, tilde: bool = False,
                       weights: dict[int, float] | None = None, seed_map: dict[int, float] | None = None
                       ) -> SimplexInstance:
    """The K (or K-tilde) program of the ball at its center restricted to targets W.

    Variables are the midpoints of W in sphere-1 order.  ``weights`` multiplies
    the coefficient of a target (used for potentials); ``seed_map`` gives an
    optional extra starting point as weights on sphere-1 vertices.
    """
    W = ball.sphere2 if W is None else tuple(W)
    used = set()
    for w in W:
        used.update(ball.midpoints[w])
    var = [u for u in ball.sphere1 if u in used]
    pos = {u: i for i, u in enumerate(var)}
    coeffs, rows = [], []
    scale = 1.0 if tilde else 2.0
    for w in W:
        row = np.zeros(len(var))
        logc = math.log(ball.l2[w])
        for u in ball.midpoints[w]:
            e = ball.ell[(u, w)]
            row[pos[u]] = scale * e
            logc -= 2.0 * e * math.log(ball.rate_in[u])
        c = math.exp(logc)
        if weights is not None:
            c *= weights[w]
        coeffs.append(c)
        rows.append(row)
    seeds = ()
    if seed_map and var:
        s = np.array([seed_map.get(u, 0.0) for u in var])
        if s.sum() > 0:
            seeds = (s,)
    return SimplexInstance(len(var), np.array(coeffs), np.array(rows).reshape(len(coeffs), len(var)),
                           "ktilde" if tilde else "k", seeds=seeds, labels=tuple(var))


# cyclically monotone sets

def _maximize_concave_block(coeffs: np.ndarray, expo: np.ndarray) -> tuple[float, np.ndarray]:
    """Max of a positive combination of weighted geometric means on the simplex."""
    n = expo.shape[1]
    if n == 1:
        return float(coeffs.sum()), np.ones(1)
    inst = SimplexInstance(n, coeffs, expo, "homog1")
    X = ascend(inst, np.full((1, n), 1.0 / n), max_iter=5000, tol=1e-15)
    cands = list(X) + _snap(inst, X) + _vertices(n)
    vals = inst.value(np.array(cands))
    i = int(np.argmax(vals))
    return float(vals[i]), cands[i]


def solve_k_set(s: CyclicSet, g: GraphSpace, n_starts: int = 16, seed: int = 0,
                max_rounds: int = 500) -> SolveResult:
    """K(S) by alternating maximization over the forward and backward weights."""
    terms = []  # (z, z'', coefficient, mids, ell, lz, lw)
    for z, w in sorted(s.forward):
        if g.d(z, w) != 2:
            continue
        bz, bw = ball_profile(g, z), ball_profile(g, w)
        mids = bz.midpoints[w]
        coef = math.sqrt(bz.l2[w] * bw.l2[z])
        ell = np.array([bz.ell[(u, w)] for u in mids])
        denom = np.array([g.rate(z, u) * g.rate(w, u) for u in mids])
        terms.append((z, w, coef, mids, ell, denom))
    if not terms:
        return SolveResult(0.0, np.zeros(0), EXACT_GRID, "no distance-2 pairs")
    fwd_vars = {z: s.v_fwd[z] for z in s.zset if s.v_fwd[z]}
    bwd_vars = {w: s.v_bwd[w] for w in s.zset if s.v_bwd[w]}
    rng = np.random.default_rng(seed)

    def objective(P, sz, Q, tw):
        tot = 0.0
        for z, w, coef, mids, ell, den in terms:
            pz = np.array([P[z][fwd_vars[z].index(u)] for u in mids])
            qw = np.array([Q[w][bwd_vars[w].index(u)] for u in mids])
            tot += coef * sz[z] * tw[w] * float(np.prod((pz * qw / den) ** ell))
        return tot

    def half_step(side_vars, other, other_scale, key_self, key_other):
        # maximize over one side with the other side fixed
        best_p, g_star = {}, {}
        for z, vs in side_vars.items():
            cs, rows = [], []
            for t in terms:
                if t[key_self] != z:
                    continue
                zo = t[key_other]
                coef, mids, ell, den = t[2], t[3], t[4], t[5]
                qo = np.array([other[zo][bwd_or_fwd[key_other][zo].index(u)] for u in mids])
                c = coef * other_scale[zo] * float(np.prod((qo / den) ** ell))
                row = np.zeros(len(vs))
                for u, e in zip(mids, ell):
                    row[vs.index(u)] = e
                if c > 0:
                    cs.append(c)
                    rows.append(row)
            if cs:
                val, p = _maximize_concave_block(np.array(cs), np.array(rows))
            else:
                val, p = 0.0, np.full(len(vs), 1.0 / len(vs))
            best_p[z], g_star[z] = p, val
        norm = math.sqrt(sum(v * v for v in g_star.values()))
        scale = {z: (g_star[z] / norm if norm > 0 else 1.0 / math.sqrt(len(g_star))) for z in g_star}
        return best_p, scale, norm

    bwd_or_fwd = {0: fwd_vars, 1: bwd_vars}
    best_val, best_arg = -1.0, None
    for k in range(n_starts):
        if k == 0:
            Q = {w: np.full(len(v), 1.0 / len(v)) for w, v in bwd_vars.items()}
            tw = {w: 1.0 / math.sqrt(len(bwd_vars)) for w in bwd_vars}
        else:
            Q = {w: rng.dirichlet(np.ones(len(v))) for w, v in bwd_vars.items()}
            raw = rng.random(len(bwd_vars)) + 1e-3
            raw /= np.linalg.norm(raw)
            tw = dict(zip(bwd_vars, raw))
        prev = -1.0
        for _ in range(max_rounds):
            P, sz, _ = half_step(fwd_vars, Q, tw, 0, 1)
            Q, tw, val = half_step(bwd_vars, P, sz, 1, 0)
            if val - prev < 1e-13:
                break
            prev = val
        val = objective(P, sz, Q, tw)
        if val > best_val:
            best_val, best_arg = val, (P, sz, Q, tw)
    P, sz, Q, tw = best_arg
    arg = np.concatenate([sz[z] * P[z] for z in sorted(P)] + [tw[w] * Q[w] for w in sorted(Q)])
    return SolveResult(best_val, arg, MULTISTART, {"starts": n_starts})


def solve_r1_set(s: CyclicSet, g: GraphSpace) -> float:
    """Lower bound 4 / sup_z [1/(1-K(z, VV->)) + 1/(1-K(z, VV<-))] on R1(S)."""
    sup = 0.0
    for z in sorted(s.zset):
        ball = ball_profile(g, z)
        tot = 0.0
        for vs, ws in ((s.v_fwd[z], s.vv_fwd[z]), (s.v_bwd[z], s.vv_bwd[z])):
            if not vs:
                continue
            k = solve_k(instance_from_ball(ball, ws)).value if ws else 0.0
            if k >= 1.0:
                raise KAtLeastOne(k, g.label(z))
            tot += 1.0 / (1.0 - k)
        sup = max(sup, tot)
    return math.inf if sup == 0 else 4.0 / sup
