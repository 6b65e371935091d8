"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line that is printed in the terminal
summary (see conftest.py); running this file as a script prints the same lines.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from entcurv.bridge_transport import dirac_bridge, transport_lp
from entcurv.curvature_compare import gamma2, lly_curvature
from entcurv.graph_core import ball_profile, build_graph_space
from entcurv.local_curvature import k_local, motzkin_strauss_k, vertex_curvature
from entcurv.model_zoo import (IsingSpec, bernoulli_laplace, class_c_ball, complete, curie_weiss, cycle, hypercube,
                               ising_hessian, lattice_box, path, petal, petersen, rho_tilde, rho_v, transposition,
                               windmill)
from entcurv.perturbation import averaged_dtv, bridge_potential, second_derivative
from entcurv.simplex_opt import CLIQUE, MULTISTART, instance_from_ball, solve_k
from entcurv.spectral_tools import cheeger_constants, lambda2
from entcurv.verify_suite import (bonnet_myers_bound, check_mlsi_poincare, check_tensorization, curvature_pack,
                                  functional_forms, random_measure, sweep_displacement, transport_diameter_bound)

RESULTS: dict[int, str] = {}


def record(num: int, ok: bool, detail: str) -> None:
    RESULTS[num] = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[num]


def star(k: int):
    return build_graph_space(["c"] + [f"a{i}" for i in range(k)], [("c", f"a{i}") for i in range(k)])


def zoo():
    return [hypercube(2), hypercube(3), hypercube(4), cycle(4), cycle(5), cycle(6), cycle(7), path(3), path(4),
            complete(3), complete(4), petersen(), windmill(), star(3), lattice_box((3, 3)), bernoulli_laplace(4, 2),
            transposition(4), petal(2)]


def test_c01_hypercube_closed_forms():
    start = time.perf_counter()
    worst = 0.0
    for n in range(2, 7):
        g = hypercube(n)
        for z in range(g.n):
            vc = vertex_curvature(g, z)
            assert vc.mode == CLIQUE
            worst = max(worst, abs(vc.K - (1 - 1 / n)), abs(vc.r + 2 * math.log(1 - 1 / n)),
                        abs(vc.r1 - 4 / n), abs(vc.rtilde2 - 1))
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-8 and elapsed < 10, f"max error {worst:.2e}, {elapsed:.2f} s")


def test_c02_lattice_interior():
    worst = 0.0
    for dims in ((5, 5), (5, 5, 5)):
        g = lattice_box(dims)
        interior = [z for z in range(g.n) if z not in g.clipped]
        assert interior
        for z in interior:
            vc = vertex_curvature(g, z)
            worst = max(worst, abs(vc.K - 1), abs(vc.rtilde2))
    record(2, worst <= 1e-8, f"max error {worst:.2e}")


def test_c03_geodetic():
    g = petersen()
    ks = [k_local(g, z).value for z in range(g.n)]
    w = windmill(4, 2)
    # the hub has an empty second sphere; the value 3 belongs to the endpoints of a cross edge
    k_blade = [k_local(w, v).value for v in ("a1", "a2", "a3", "b1", "b2", "b3")]
    k_hub = k_local(w, "h").value
    ok = all(k == 2 for k in ks) and all(k == pytest.approx(3, abs=1e-12) for k in k_blade) and k_hub == 0
    record(3, ok, f"Petersen K = {sorted(set(ks))}, windmill blade K = {max(k_blade):.12g}, hub K = {k_hub}")


def test_c04_motzkin_straus():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        n1 = int(rng.integers(3, 6))
        edges = [e for e in itertools.combinations(range(n1), 2) if rng.random() < 0.5] or [(0, 1)]
        g = class_c_ball(edges, n1)
        inst = instance_from_ball(ball_profile(g, "z"))
        assert inst.n_vars <= 10
        a, b = solve_k(inst, CLIQUE).value, solve_k(inst, MULTISTART).value
        worst = max(worst, abs(a - b))
    drawn = class_c_ball([(0, 1), (1, 2), (0, 2), (2, 3)], 4)
    val = motzkin_strauss_k(drawn, "z")[0]
    record(4, worst <= 1e-6 and abs(val - 2 / 3) <= 1e-12, f"max gap {worst:.2e}, drawn ball {val:.12g}")


def test_c05_petal():
    small = {n: k_local(petal(n), "z").value for n in (1, 2, 4, 8, 16, 27)}
    g = petal(38)
    seeds = {g.idx(k): v for k, v in g.meta["k_seeds"]["z"].items()}
    big = solve_k(instance_from_ball(ball_profile(g, "z"), seed_map=seeds)).value
    ok = all(v <= 1 + 1e-12 for v in small.values()) and big > 1
    record(5, ok, f"max K for n <= 27: {max(small.values()):.6f}, K(38) >= {big:.6f}")


def test_c06_bridge_sanity():
    rng = np.random.default_rng(6)
    models = zoo()
    worst = 0.0
    for _ in range(200):
        g = models[int(rng.integers(len(models)))]
        x, y = (int(a) for a in rng.integers(0, g.n, 2))
        nu = dirac_bridge(g, x, y, float(rng.random()))
        worst = max(worst, abs(nu.sum() - 1))
    ends = all(dirac_bridge(g, 0, g.n - 1, 0.0)[0] == 1 and dirac_bridge(g, 0, g.n - 1, 1.0)[g.n - 1] == 1
               for g in models)
    record(6, worst <= 1e-12 and ends, f"max mass error {worst:.2e}")


def _brute_w1(a, b, C):
    m, n = len(a), len(b)
    best = None
    for pr in itertools.permutations(range(m)):
        for pc in itertools.permutations(range(n)):
            aa, bb = [a[i] for i in pr], [b[j] for j in pc]
            i = j = 0
            cost = 0
            while i < m and j < n:
                q = min(aa[i], bb[j])
                cost += q * C[pr[i]][pc[j]]
                aa[i] -= q
                bb[j] -= q
                if aa[i] == 0:
                    i += 1
                else:
                    j += 1
            best = cost if best is None else min(best, cost)
    return best


def _fractions(rng, k):
    w = rng.integers(1, 10, size=k)
    return [Fraction(int(v), int(w.sum())) for v in w]


def test_c07_w1_lp():
    rng = np.random.default_rng(7)
    mismatches = 0
    for _ in range(50):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        a, b = _fractions(rng, m), _fractions(rng, n)
        C = rng.integers(0, 6, size=(m, n)).tolist()
        _, val = transport_lp(a, b, C)
        mismatches += val != _brute_w1(a, b, C)
    record(7, mismatches == 0, f"{mismatches} mismatches in 50")


def test_c08_displacement_convexity():
    start = time.perf_counter()
    g = hypercube(3)
    t2 = sweep_displacement(g, "t2", -2 * math.log(2 / 3), samples=20, seed=8)
    ct = sweep_displacement(g, "ctilde", 1.0, samples=20, seed=8)
    elapsed = time.perf_counter() - start
    ok = t2.slack >= -1e-9 and ct.slack >= -1e-9 and elapsed < 30
    record(8, ok, f"min slack T2 {t2.slack:.3e}, C~ {ct.slack:.3e}, {elapsed:.2f} s")


def test_c09_second_derivative():
    rng = np.random.default_rng(9)
    models = [hypercube(3), hypercube(4), lattice_box((4, 4)), cycle(7), petersen(), bernoulli_laplace(5, 2)]
    worst = 0.0
    h = 1e-4
    for _ in range(100):
        g = models[int(rng.integers(len(models)))]
        v = rng.normal(size=g.n)
        x, y = (int(a) for a in rng.integers(0, g.n, 2))
        t = float(rng.uniform(0.05, 0.95))
        R = lambda s: bridge_potential(g, v, x, y, s)
        fd = (R(t + h) - 2 * R(t) + R(t - h)) / (h * h)
        exact = second_derivative(g, v, x, y, t)
        worst = max(worst, abs(exact - fd) / (1 + abs(exact)))
    record(9, worst <= 1e-5, f"max relative error {worst:.2e}")


def test_c10_constant_hessian():
    rng = np.random.default_rng(10)
    n = 4
    V = np.triu(rng.integers(-8, 9, size=(n, n)) / 8, 1)
    V = V + V.T
    spec = IsingSpec(rng.integers(-8, 9, size=n) / 8, V)
    exact = all(np.array_equal(ising_hessian(spec, z), V) for z in itertools.product((0, 1), repeat=n))
    g = hypercube(n)
    v = np.array([spec.potential(g.coords[i]) for i in range(g.n)])
    worst = 0.0
    for x in range(g.n):
        for y in range(g.n):
            d = g.d(x, y)
            if d < 2:
                continue
            dx = np.array(g.coords[x]) - np.array(g.coords[y])
            want = sum(dx[i] * dx[j] * V[i, j] for i in range(n) for j in range(n) if i != j) / (d * (d - 1))
            worst = max(worst, abs(averaged_dtv(g, v, x, y, 0.3) - want))
    record(10, exact and worst <= 1e-8, f"Hessian exact: {exact}, max integral error {worst:.2e}")


def _rho_tilde_oracle(W, beta):
    lam = float(np.linalg.eigvalsh(W)[-1])
    lam_abs = float(np.linalg.eigvalsh(np.abs(W))[-1])
    s = 2 * beta * float(np.max(np.abs(W)))
    return 1 - 2 * beta * lam - 2 * beta * lam_abs * (math.exp(s) - s - 1) / s


def test_c11_rho_screening():
    zero = rho_v(IsingSpec(np.zeros(5), np.zeros((5, 5))))
    W = curie_weiss(10)
    lo, hi = rho_tilde(W, 0.04), rho_tilde(W, 0.2)
    agree = abs(lo - _rho_tilde_oracle(W, 0.04)) <= 1e-12 and abs(hi - _rho_tilde_oracle(W, 0.2)) <= 1e-12
    record(11, zero == 1.0 and lo > 0 and hi < 0 and agree, f"rho(0) = {zero}, rho~(0.04) = {lo:.6f}, "
                                                           f"rho~(0.2) = {hi:.6f}")


def test_c12_spectral():
    gaps = [lambda2(hypercube(n)) for n in range(1, 7)]
    bad = []
    for g in zoo():
        if g.n > 24:
            continue
        h, lam = cheeger_constants(g)["h_G"], lambda2(g)
        if not 2 * h >= lam - 1e-9 >= h * h / 2 - 1e-9:
            bad.append(g.name)
    err = max(abs(x - 2) for x in gaps)
    record(12, err <= 1e-9 and not bad, f"max gap error {err:.2e}, chain failures {bad}")


def test_c13_tensorization():
    factors = [hypercube(1), hypercube(2), path(3), cycle(4)]
    failures = []
    for g1, g2 in itertools.combinations_with_replacement(factors, 2):
        out = check_tensorization(g1, g2)
        if not out.holds:
            failures.append((g1.name, g2.name, out.witness))
    record(13, not failures, f"{len(failures)} failing products")


def test_c14_bonnet_myers():
    bad = []
    checked = 0
    for g in zoo():
        kappa = curvature_pack(g)["kappa"]
        if kappa is not None and kappa > 0:
            checked += 1
            if not bonnet_myers_bound(g, kappa)[1]:
                bad.append(g.name)
    cube_ok = True
    for n in range(2, 7):
        bound = transport_diameter_bound(hypercube(n), 4 / n)
        cube_ok &= abs(bound - n * math.sqrt(2 * math.log(2))) <= 1e-9 and bound >= n
    record(14, not bad and cube_ok and checked > 0, f"{checked} models with kappa > 0, failures {bad}")


def test_c15_functional_inequalities():
    g = hypercube(4)
    out = check_mlsi_poincare(g, {"kappa_tilde2": 1.0}, samples=50, seed=15)
    rng = np.random.default_rng(15)
    forms = functional_forms(g, np.exp(rng.normal(size=16)), rng.normal(size=16), {"kappa_tilde2": 1.0})
    lam = lambda2(g)
    ok = out.holds and all(l <= r + 1e-12 for l, r in forms.values()) and abs(lam - 2 * 1.0) <= 1e-9
    record(15, ok, f"min slack {out.slack:.3e}, lambda2 = {lam:.12g}")


def test_c16_lly_and_gamma2():
    k = lly_curvature(windmill(4, 2), "a1", "a2")
    g = hypercube(3)
    rng = np.random.default_rng(16)
    low = min(gamma2(g, g.moves, rng.normal(size=8), z) for _ in range(50) for z in range(8))
    record(16, abs(k - 2 / 3) <= 1e-6 and low >= -1e-10, f"kappa_LLY = {k:.9f}, min Gamma2 = {low:.3e}")


def test_c17_bound_chain():
    bad = []
    checked = 0
    for g in zoo():
        for z in range(g.n):
            if z in g.clipped:
                continue
            vc = vertex_curvature(g, z)
            if not math.isfinite(vc.r):
                continue
            k = math.exp(-vc.r / 2)
            if vc.r1 is not None:
                checked += 1
                if not 2 * (1 - k) - 1e-8 <= vc.r1 <= 4 * (1 - k) + 1e-8:
                    bad.append((g.name, g.label(z), "r1"))
            if vc.rbar is not None and vc.r > 0:
                checked += 1
                if not vc.r - 1e-8 <= vc.rbar <= 2 * vc.r + 1e-8:
                    bad.append((g.name, g.label(z), "rbar"))
    record(17, not bad and checked > 0, f"{checked} inequalities checked, failures {bad[:3]}")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except AssertionError:
                pass
    for num in sorted(RESULTS):
        print(RESULTS[num])
