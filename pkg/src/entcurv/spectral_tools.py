"""Dense symmetric eigenvalues, spectral gap, Cheeger constants and cliques."""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .errors import NotSymmetric, TooLargeForExact

JACOBI_LIMIT = 256


def sym_eigs(m, tol: float = 1e-12, max_sweeps: int = 100, method: str = "auto") -> np.ndarray:
    """Eigenvalues of a symmetric matrix in ascending order.

    The default is a cyclic Jacobi iteration run until the off-diagonal
    Frobenius norm falls below ``tol * max(1, ||A||_F)``.  Above 256 rows the
    ``auto`` method hands over to LAPACK (numpy.linalg.eigvalsh).
    """
    A = np.array(m, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetric("matrix is not square")
    n = A.shape[0]
    if n and np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
        raise NotSymmetric(float(np.max(np.abs(A - A.T))))
    A = 0.5 * (A + A.T)
    if method == "lapack" or (method == "auto" and n > JACOBI_LIMIT):
        return np.linalg.eigvalsh(A)
    scale = max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float(np.sum(A * A) - np.sum(np.diag(A) ** 2))))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * scale:
                    A[p, q] = A[q, p] = 0.0
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                colp, colq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp, rowq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = A[q, p] = 0.0
    return np.sort(np.diag(A))


def gershgorin_dominant(m) -> bool:
    """True iff B_ii >= sum_{j != i} |B_ij| for every row."""
    B = np.asarray(m, dtype=float)
    if np.max(np.abs(B - B.T), initial=0.0) > 1e-12:
        raise NotSymmetric("matrix is not symmetric")
    off = np.abs(B).sum(axis=1) - np.abs(np.diag(B))
    return bool(np.all(np.diag(B) >= off))


def generator_matrix(g, kind: str = "l2") -> np.ndarray:
    """Matrix of -L for the given generator of the space (rows sum to zero)."""
    from .graph_core import generator_rate

    m = g.measure
    A = np.zeros((g.n, g.n))
    for x in range(g.n):
        for y in g.neighbors(x):
            A[x, y] = -(g.rate(x, y) if kind == "own" else generator_rate(kind, m[x], m[y]))
        A[x, x] = -A[x].sum()
    return A


def lambda2(g, method: str = "auto") -> float:
    """Spectral gap of -L2 on L2(mu).

    It is the best constant in lambda2 Var_mu(g) <= E(g, g) with the Dirichlet
    form E(g, g) = (1/2) sum_x mu(x) sum_{x' ~ x} (g(x) - g(x'))^2; it equals
    2 on every hypercube and on the two-point space.
    """
    A = generator_matrix(g, "l2")
    mu = g.mu
    r = np.sqrt(mu)
    S = (r[:, None] * A) / r[None, :]
    S = 0.5 * (S + S.T)
    ev = sym_eigs(S, method=method)
    if abs(ev[0]) > 1e-9:
        raise ArithmeticError(f"smallest eigenvalue {ev[0]} is not zero")
    return float(ev[1]) if len(ev) > 1 else math.inf


def dirichlet_sum(g, f) -> float:
    """sum_x mu(x) sum_{x' ~ x} (f(x) - f(x'))^2."""
    f = np.asarray(f, float)
    mu = g.mu
    return float(sum(mu[x] * sum((f[x] - f[y]) ** 2 for y in g.neighbors(x)) for x in range(g.n)))


def sup_gradient_sum(g, f) -> float:
    """sum_x mu(x) sup_{x' ~ x} (f(x) - f(x'))^2, the form defining lambda_infinity."""
    f = np.asarray(f, float)
    mu = g.mu
    return float(sum(mu[x] * max((f[x] - f[y]) ** 2 for y in g.neighbors(x)) for x in range(g.n)))


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


def cheeger_constants(g, sample: bool = False, n_samples: int = 100_000, seed: int = 0,
                      chunk: int = 1 << 18) -> dict:
    """Edge expansion h_G, vertex expansions g_in, g_out and the conductance Phi_mu.

    h_G minimizes |dA|/|A| over |A| <= |X|/2 (edge boundary); the mu-weighted
    constants minimize over mu(A) <= 1/2:
    g_in = mu(inner boundary)/mu(A), g_out = mu(outer boundary)/mu(A) and
    Phi = sum_{x in A, y not in A, x ~ y} mu(x) / mu(A).  Exact up to 24
    vertices; with ``sample`` larger graphs get sampled upper bounds.
    """
    n = g.n
    exact = n <= 24
    if not exact and not sample:
        raise TooLargeForExact(f"{n} vertices > 24")
    mu = g.mu
    nb_mask = np.array([sum(1 << y for y in g.neighbors(x)) for x in range(n)], dtype=np.int64)
    best = {"h_G": math.inf, "g_in": math.inf, "g_out": math.inf, "Phi_mu": math.inf}

    def process(S: np.ndarray):
        size = _popcount(S)
        muA = np.zeros(len(S))
        inner = np.zeros(len(S))
        outer = np.zeros(len(S))
        edge = np.zeros(len(S), dtype=np.int64)
        flow = np.zeros(len(S))
        full = (1 << n) - 1
        comp = full & ~S
        for x in range(n):
            inA = ((S >> x) & 1).astype(bool)
            out_nb = _popcount(comp & nb_mask[x])
            in_nb = (S & nb_mask[x]) != 0
            muA += np.where(inA, mu[x], 0.0)
            inner += np.where(inA & (out_nb > 0), mu[x], 0.0)
            outer += np.where(~inA & in_nb, mu[x], 0.0)
            edge += np.where(inA, out_nb, 0)
            flow += np.where(inA, mu[x] * out_nb, 0.0)
        ok = (size >= 1) & (2 * size <= n)
        if ok.any():
            best["h_G"] = min(best["h_G"], float(np.min(edge[ok] / size[ok])))
        okm = (size >= 1) & (muA <= 0.5 + 1e-12)
        if okm.any():
            best["g_in"] = min(best["g_in"], float(np.min(inner[okm] / muA[okm])))
            best["g_out"] = min(best["g_out"], float(np.min(outer[okm] / muA[okm])))
            best["Phi_mu"] = min(best["Phi_mu"], float(np.min(flow[okm] / muA[okm])))

    if exact:
        total = 1 << n
        for start in range(1, total, chunk):
            process(np.arange(start, min(total, start + chunk), dtype=np.int64))
    else:
        rng = np.random.default_rng(seed)
        if n > 62:
            raise TooLargeForExact("sampling limited to 62 vertices")
        for start in range(0, n_samples, chunk):
            k = min(chunk, n_samples - start)
            bits = rng.random((k, n)) < rng.random((k, 1))
            S = (bits.astype(np.int64) << np.arange(n, dtype=np.int64)).sum(axis=1)
            process(S)
    best["exact"] = exact
    return best


def max_clique(adjacency, return_clique: bool = False):
    """Clique number by Bron-Kerbosch with pivoting.

    ``adjacency`` maps each vertex to its neighbors (or is a 0/1 matrix).  The
    empty graph on at least one vertex has clique number 1; among maximum
    cliques the lexicographically smallest sorted one is returned.
    """
    if isinstance(adjacency, Mapping):
        adj = {u: set(vs) - {u} for u, vs in adjacency.items()}
    else:
        M = np.asarray(adjacency)
        adj = {i: {j for j in range(len(M)) if M[i, j] and j != i} for i in range(len(M))}
    for u in list(adj):
        for v in adj[u]:
            adj.setdefault(v, set()).add(u)
    if not adj:
        return (0, ()) if return_clique else 0
    best: list[tuple] = [()]

    def consider(R):
        c = tuple(sorted(R))
        if len(c) > len(best[0]) or (len(c) == len(best[0]) and c < best[0]):
            best[0] = c

    def expand(R, P, X):
        if not P and not X:
            consider(R)
            return
        if len(R) + len(P) < len(best[0]):
            return
        pivot = max(P | X, key=lambda u: len(adj[u] & P))
        for v in sorted(P - adj[pivot]):
            expand(R | {v}, P & adj[v], X & adj[v])
            P = P - {v}
            X = X | {v}

    expand(set(), set(adj), set())
    omega = len(best[0])
    return (omega, best[0]) if return_clique else omega
