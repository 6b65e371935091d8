from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcurv.curvature_compare import (compare_table, gamma2, gamma2_form, gamma2_square_sum, girth,
                                       girth_criterion, kappa_alpha, lazy_walk, lly_curvature)
from entcurv.graph_core import build_graph_space
from entcurv.model_zoo import complete, cycle, hypercube, path, petersen, windmill


def star(k: int):
    return build_graph_space(["c"] + [f"a{i}" for i in range(k)], [("c", f"a{i}") for i in range(k)])


def test_windmill_values():
    g = windmill()
    assert lly_curvature(g, "a1", "a2") == pytest.approx(2 / 3, abs=1e-9)
    assert lly_curvature(g, "h", "a1") == pytest.approx(1 / 6, abs=1e-9)


def test_two_point_by_hand():
    # m_x = (1 - a) delta_x + a delta_y, so W1(m_x, m_y) = |1 - 2a| and kappa_a = 2a
    g = complete(2)
    for a in (Fraction(1, 10), Fraction(1, 1000)):
        assert kappa_alpha(g, 0, 1, a) == 2 * a
    assert lly_curvature(g, 0, 1) == pytest.approx(2.0)


def test_known_lly_values():
    assert lly_curvature(complete(4), 0, 1) == pytest.approx(4 / 3)
    assert lly_curvature(hypercube(3), 0, 1) == pytest.approx(2 / 3)
    assert lly_curvature(cycle(6), 0, 1) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("model", [windmill(2), petersen(), path(4), star(3)])
def test_lazy_walk_rows(model):
    a = Fraction(1, 3)
    w = lazy_walk(model, a)
    for x in range(model.n):
        row = w[x]
        assert sum(row.values()) == 1 and all(p >= 0 for p in row.values())
        assert set(row) == set(model.neighbors(x)) | {x}
    with pytest.raises(ValueError):
        lazy_walk(model, 1)


def test_kappa_alpha_is_exact():
    assert isinstance(kappa_alpha(petersen(), 0, 1, Fraction(1, 1000)), Fraction)


def test_petersen_girth_criterion():
    out = girth_criterion(petersen())
    assert out["girth"] == 5
    assert out["min_margin"] == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("model", [cycle(5), cycle(7), path(5), star(4), petersen(), hypercube(3),
                                   complete(4), windmill(2)])
def test_girth_criterion_implies_girth_at_least_five(model):
    out = girth_criterion(model)
    if out["hypothesis"]:
        assert out["girth"] >= 5


def test_girth():
    assert girth(cycle(7)) == 7 and girth(complete(3)) == 3 and girth(hypercube(3)) == 4
    assert girth(path(4)) == float("inf")


def hypercube_gamma2_oracle(d: int, f, z: int) -> float:
    """Gamma_2 on the uniform cube with unit rates by the definition applied to polynomials."""
    n = 1 << d

    def L(u):
        return np.array([sum(u[x ^ (1 << i)] - u[x] for i in range(d)) for x in range(n)])

    def G(u, v):
        return np.array([0.5 * sum((u[x ^ (1 << i)] - u[x]) * (v[x ^ (1 << i)] - v[x]) for i in range(d))
                         for x in range(n)])

    return float((0.5 * L(G(f, f)) - G(f, L(f)))[z])


@settings(max_examples=25)
@given(st.lists(st.floats(-3, 3), min_size=8, max_size=8), st.integers(0, 7))
def test_gamma2_on_cube(vals, z):
    g = hypercube(3)
    f = np.array(vals)
    v = gamma2(g, g.moves, f, z)
    assert v >= -1e-10
    assert v == pytest.approx(hypercube_gamma2_oracle(3, f, z), abs=1e-9)
    assert v == pytest.approx(gamma2_square_sum(g, g.moves, f, z), abs=1e-9)


def test_gamma2_polarisation():
    g = petersen()
    rng = np.random.default_rng(4)
    f, h = rng.normal(size=10), rng.normal(size=10)
    lhs = gamma2_form(g, f + h, f + h) - gamma2_form(g, f - h, f - h)
    assert np.allclose(lhs, 4 * gamma2_form(g, f, h))


def test_gamma2_on_weighted_space_skips_square_sum():
    g = build_graph_space([0, 1, 2], [(0, 1), (1, 2)], measure=[0.2, 0.3, 0.5])
    assert np.isfinite(gamma2(g, None, np.array([1.0, 0.0, 2.0]), 1))


def test_compare_table():
    rows = compare_table(hypercube(2), samples=5, seed=0)
    assert [r["vertex"] for r in rows] == ["00", "01", "10", "11"]
    for r in rows:
        assert r["K"] == pytest.approx(0.5)
        assert r["lly_min"] == pytest.approx(1.0)
        assert r["gamma2_min"] >= -1e-10
    assert compare_table(hypercube(2), samples=5, seed=0) == rows
