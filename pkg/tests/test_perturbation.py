import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcurv.bridge_transport import dirac_bridge
from entcurv.errors import DistanceBelowTwo, DistanceNotTwo
from entcurv.graph_core import ball_profile, is_convex, restrict
from entcurv.local_curvature import k_local
from entcurv.model_zoo import IsingSpec, bernoulli_laplace, cycle, hypercube, lattice_box, petersen, rho_v
from entcurv.perturbation import (averaged_dtv, bridge_potential, discrete_laplacian, dtv, perturbation_cost,
                                  perturbed_k, perturbed_space, second_derivative)
from entcurv.simplex_opt import instance_from_ball, solve_k, solve_k_tilde


def _quadratic_on_cube(g, T, V):
    spec = IsingSpec(np.asarray(T, float), np.asarray(V, float))
    return np.array([spec.potential(g.coords[i]) for i in range(g.n)])


def test_perturbed_space_examples():
    g = hypercube(2)
    same = perturbed_space(g, np.zeros(4))
    assert same.rates == g.rates and np.array_equal(same.measure, g.measure)
    shifted = perturbed_space(g, np.full(4, 0.7))
    assert shifted.rates == pytest.approx(g.rates)
    np.testing.assert_allclose(shifted.measure, math.exp(-0.7) * g.measure)
    h = perturbed_space(g, [sum(g.coords[i]) for i in range(4)])
    assert h.rate(h.idx("00"), h.idx("01")) == pytest.approx(math.exp(-0.5))
    m = h.measure
    for (x, y), r in h.rates.items():
        assert m[x] * r == pytest.approx(m[y] * h.rate(y, x), rel=1e-12)


def test_discrete_laplacian_examples():
    g = hypercube(3)
    V = np.array([[0, 0.5, -1.0], [0.5, 0, 2.0], [-1.0, 2.0, 0]])
    v = _quadratic_on_cube(g, [0.3, -1.0, 0.2], V)
    for z in range(8):
        for w in g.sphere(z, 2):
            i, j = [k for k in range(3) if g.coords[z][k] != g.coords[w][k]]
            zi, zj = g.coords[z][i], g.coords[z][j]
            assert discrete_laplacian(g, v, z, w) == pytest.approx((1 - 2 * zi) * (1 - 2 * zj) * V[i, j], abs=1e-12)
            assert discrete_laplacian(g, v, z, w) == pytest.approx(discrete_laplacian(g, v, w, z), abs=1e-12)
    lin = [2 * c[0] - c[1] + 0.5 * c[2] for c in (g.coords[i] for i in range(8))]
    assert all(abs(discrete_laplacian(g, lin, z, w)) < 1e-12 for z in range(8) for w in g.sphere(z, 2))
    with pytest.raises(DistanceNotTwo):
        discrete_laplacian(g, lin, 0, 1)


def test_dtv_examples():
    g = hypercube(4)
    assert dtv(g, np.full(16, 3.0), 0, 15, 0.4) == 0
    with pytest.raises(DistanceBelowTwo):
        dtv(g, np.zeros(16), 0, 1, 0.5)
    assert second_derivative(g, np.arange(16.0), 0, 1, 0.5) == 0.0


def test_cube_constant_hessian_average():
    rng = np.random.default_rng(5)
    g = hypercube(4)
    V = np.triu(rng.normal(size=(4, 4)), 1)
    V = V + V.T
    v = _quadratic_on_cube(g, rng.normal(size=4), V)
    for x, y in [(0, 15), (3, 12), (5, 6), (1, 14)]:
        dx = np.array(g.coords[x]) - np.array(g.coords[y])
        d = g.d(x, y)
        want = 2 * sum(dx[i] * dx[j] * V[i, j] for i in range(4) for j in range(i + 1, 4)) / (d * (d - 1))
        for t in (0.1, 0.5, 0.8):
            assert averaged_dtv(g, v, x, y, t) == pytest.approx(want, abs=1e-8)


def test_lattice_quadratic():
    box = lattice_box((6, 6))
    V = np.array([[1.0, 0.3], [0.3, 2.0]])
    v = np.array([0.5 * np.asarray(box.coords[i]) @ V @ np.asarray(box.coords[i]) for i in range(box.n)])
    for a, b in [("1,0", "4,2"), ("0,5", "3,1"), ("2,2", "2,5")]:
        x, y = box.idx(a), box.idx(b)
        dd = np.array(box.coords[y]) - np.array(box.coords[x])
        want = dd @ V @ dd - float(np.sum(np.diag(V) * np.abs(dd)))
        d = box.d(x, y)
        for t in (0.25, 0.6):
            assert d * (d - 1) * dtv(box, v, x, y, t) == pytest.approx(want, abs=1e-9)


def test_perturbed_k_examples():
    g = hypercube(3)
    assert perturbed_k(g, np.zeros(8), 0).value == pytest.approx(k_local(g, 0).value, abs=1e-12)
    lin = [c[0] + 2 * c[2] for c in (g.coords[i] for i in range(8))]
    assert perturbed_k(g, lin, 0).value == pytest.approx(2 / 3, abs=1e-9)
    V = 0.1 * (np.ones((3, 3)) - np.eye(3))
    v = _quadratic_on_cube(g, np.zeros(3), V)
    rho = rho_v(IsingSpec(np.zeros(3), V))
    for z in range(8):
        assert perturbed_k(g, v, z).value <= 1 - rho / 3 + 1e-9


def test_perturbed_k_matches_k_on_perturbed_space():
    rng = np.random.default_rng(11)
    for g in (hypercube(3), bernoulli_laplace(4, 2), cycle(6)):
        v = rng.normal(size=g.n)
        gv = perturbed_space(g, v)
        for z in range(0, g.n, 2):
            direct = solve_k(instance_from_ball(ball_profile(gv, z))).value
            assert perturbed_k(g, v, z).value == pytest.approx(direct, rel=1e-7, abs=1e-9)
            direct_t = solve_k_tilde(instance_from_ball(ball_profile(gv, z), tilde=True)).value
            assert perturbed_k(g, v, z, tilde=True).value == pytest.approx(direct_t, rel=1e-7, abs=1e-9)


MODELS = [hypercube(3), hypercube(4), lattice_box((4, 4)), cycle(7), petersen(), bernoulli_laplace(5, 2)]


@settings(max_examples=100)
@given(st.integers(0, len(MODELS) - 1), st.integers(0, 100_000), st.floats(0.05, 0.95))
def test_second_derivative_matches_finite_differences(gi, seed, t):
    g = MODELS[gi]
    rng = np.random.default_rng(seed)
    v = rng.normal(size=g.n)
    x, y = (int(a) for a in rng.integers(0, g.n, 2))
    h = 1e-4
    R = lambda s: bridge_potential(g, v, x, y, s)
    fd = (R(t + h) - 2 * R(t) + R(t - h)) / (h * h)
    exact = second_derivative(g, v, x, y, t)
    assert abs(exact - fd) <= 1e-5 * (1 + abs(exact))


@settings(max_examples=30)
@given(st.integers(0, len(MODELS) - 1), st.integers(0, 100_000), st.floats(0, 1))
def test_bridges_ignore_the_potential(gi, seed, t):
    g = MODELS[gi]
    rng = np.random.default_rng(seed)
    gv = perturbed_space(g, rng.normal(scale=2.0, size=g.n))
    x, y = (int(a) for a in rng.integers(0, g.n, 2))
    np.testing.assert_allclose(dirac_bridge(gv, x, y, t), dirac_bridge(g, x, y, t), atol=1e-12)


def test_bridges_survive_convex_restriction():
    g = lattice_box((5, 5))
    sub = [v for v in g.vertices if int(v.split(",")[1]) <= 2]
    assert is_convex(g, sub)
    h = restrict(g, sub)
    for a, b in [("0,0", "4,2"), ("1,2", "3,0")]:
        full = dirac_bridge(g, a, b, 0.35)
        part = dirac_bridge(h, a, b, 0.35)
        np.testing.assert_allclose([full[g.idx(u)] for u in h.vertices], part, atol=1e-12)


def test_perturbation_cost_matches_average():
    g = hypercube(4)
    v = np.random.default_rng(2).normal(size=16)
    c = perturbation_cost(g, v, 0, 15, 0.3)
    assert c == pytest.approx(12 * averaged_dtv(g, v, 0, 15, 0.3))
    assert perturbation_cost(g, v, 0, 1, 0.3) == 0.0
