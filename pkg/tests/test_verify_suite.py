import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcurv.bridge_transport import dirac, w1_coupling
from entcurv.errors import HypothesisFails, NonPositiveCurvature
from entcurv.model_zoo import complete, cycle, hypercube, path, petersen, product_space
from entcurv.spectral_tools import lambda2
from entcurv.verify_suite import (bonnet_myers_bound, check_displacement, check_mlsi_poincare,
                                  check_prekopa_leindler, check_tensorization, check_transport_entropy, ctilde_D,
                                  curvature_pack, functional_forms, prekopa_envelope, random_measure,
                                  sweep_displacement, sweep_transport_entropy, tensor_bound, tolerance,
                                  transport_diameter_bound)

KAPPA3 = -2 * math.log(2 / 3)


def test_same_dirac_has_zero_slack():
    g = hypercube(3)
    out = check_displacement(g, dirac(g, 2), dirac(g, 2), "t2", KAPPA3)
    assert out.holds and out.slack == 0


def test_hand_computed_square():
    g = hypercube(2)
    kappa = -2 * math.log(1 / 2)
    out = check_displacement(g, dirac(g, "00"), dirac(g, "11"), "t2", kappa, t_grid=(0.5,))
    # H(uniform on 4 | counting) = -log 4 against RHS = -(1/8) kappa * 2
    assert out.witness["lhs"] == pytest.approx(-math.log(4))
    assert out.witness["rhs"] == pytest.approx(-kappa / 4)
    assert out.holds and out.slack == pytest.approx(math.log(4) - kappa / 4)


def test_slack_consistent_with_holds():
    g = hypercube(3)
    rng = np.random.default_rng(0)
    for _ in range(5):
        out = check_displacement(g, random_measure(g, rng), random_measure(g, rng), "t2", 5.0)
        assert out.holds == (out.slack >= -tolerance(out.witness["rhs"]))


@pytest.mark.parametrize("cost,kappa", [("t2", KAPPA3), ("w1sq", 4 / 3), ("ttilde", 1 - math.exp(-KAPPA3)),
                                        ("tbar", 2 * KAPPA3), ("t2tilde", 1.0), ("ctilde", 1.0)])
def test_hypercube_displacement_sweeps(cost, kappa):
    out = sweep_displacement(hypercube(3), cost, kappa, samples=8, seed=1)
    assert out.holds, out.witness


def test_displacement_can_fail_with_too_much_curvature():
    g = hypercube(3)
    out = check_displacement(g, dirac(g, 0), dirac(g, 7), "t2", 10.0)
    assert not out.holds and out.witness["plan"]["plan"] == [["000", "111", 1.0]]


def test_ctilde_D():
    assert ctilde_D(hypercube(3)) == 1
    from entcurv.model_zoo import lattice_box
    assert ctilde_D(lattice_box((3, 3))) == 4


def test_prekopa_leindler_examples():
    g = hypercube(2)
    c = np.full(4, 0.3)
    out = check_prekopa_leindler(g, c, c, c, 0.4, KAPPA3)
    assert out.holds and out.slack == pytest.approx(0, abs=1e-12)
    rng = np.random.default_rng(2)
    f, h = rng.normal(size=4), rng.normal(size=4)
    for cost in ("t2", "tbar"):
        env = prekopa_envelope(g, f, h, 0.3, 2 * math.log(2), cost)
        assert check_prekopa_leindler(g, f, h, env, 0.3, 2 * math.log(2), cost).holds
    with pytest.raises(HypothesisFails):
        check_prekopa_leindler(g, f, h, env - 1.0, 0.3, 2 * math.log(2))


def test_transport_entropy_examples():
    g = hypercube(4)
    pack = curvature_pack(g)
    out = check_transport_entropy(g, g.mu, g.mu, pack)
    assert out.holds and out.slack == pytest.approx(0, abs=1e-12)
    assert sweep_transport_entropy(g, {"kappa1": 1.0}, samples=10, seed=3).holds
    assert transport_diameter_bound(g, 1.0) == pytest.approx(4 * math.sqrt(2 * math.log(2)))
    with pytest.raises(NonPositiveCurvature):
        transport_diameter_bound(g, 0.0)


def test_curvature_pack_on_hypercube():
    pack = curvature_pack(hypercube(3))
    assert pack["kappa"] == pytest.approx(KAPPA3)
    assert pack["kappa1"] == pytest.approx(4 / 3)
    assert pack["kappa_tilde2"] == pytest.approx(1.0)
    assert pack["kappa_cbar"] == pytest.approx(2 * KAPPA3)
    assert pack["kappa_tilde"] == pytest.approx(5 / 9)


def test_functional_examples():
    g = hypercube(4)
    pack = {"kappa_tilde": 0.25, "kappa_tilde2": 1.0}
    forms = functional_forms(g, np.full(16, 2.0), np.full(16, -1.0), pack, D=1)
    for lhs, rhs in forms.values():
        assert lhs == pytest.approx(0, abs=1e-12) and rhs == pytest.approx(0, abs=1e-12)
    out = check_mlsi_poincare(g, {"kappa_tilde2": 1.0}, samples=50, seed=0)
    assert out.holds
    assert lambda2(g) >= 2 * 1.0 - 1e-9
    with pytest.raises(NonPositiveCurvature):
        check_mlsi_poincare(g, {"kappa_tilde2": 0.0})


def test_poincare_on_a_cube_coordinate():
    g = hypercube(4)
    f = np.array([1.0 if c[0] else -1.0 for c in (g.coords[i] for i in range(16))])
    lhs, rhs = functional_forms(g, np.ones(16), f, {"kappa_tilde2": 1.0})["poincareT3"]
    # Var = 1 while the gradient sum is 4; the curvature constant 1 sits at half the gap
    assert (lhs, rhs) == pytest.approx((1.0, 2.0))


def test_bonnet_myers_examples():
    bound, ok = bonnet_myers_bound(hypercube(4), -2 * math.log(3 / 4))
    assert bound == pytest.approx(8 * math.log(4) / (-2 * math.log(3 / 4)) + 1) and ok
    assert bound == pytest.approx(20.275, abs=1e-3)
    assert bonnet_myers_bound(complete(2), math.inf) == (1.0, True)
    assert bonnet_myers_bound(complete(3), 0.01)[1]
    with pytest.raises(NonPositiveCurvature):
        bonnet_myers_bound(cycle(6), 0.0)


def test_tensorization_examples():
    out = check_tensorization(hypercube(1), hypercube(2))
    assert out.holds and out.samples == 16
    assert check_tensorization(cycle(5), hypercube(0)).holds
    assert check_tensorization(path(3), path(3)).holds
    assert tensor_bound([-1.0, 2.0]) == -1.0
    assert tensor_bound([-2 * math.log(1 / 2)] * 2) == pytest.approx(-2 * math.log(1 - 0.25))


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_w1_displacement_on_petersen_with_negative_curvature(seed):
    g = petersen()
    rng = np.random.default_rng(seed)
    assert check_displacement(g, random_measure(g, rng), random_measure(g, rng), "t2",
                              -2 * math.log(2)).holds
