import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holonet.gauge import NormFamilyParams, special_vectors
from holonet.oracles import (EmptyGridError, HullProblem, delta_ineq_check, geo2_check, grid_distance,
                             min_norm_point, modulus_of_convexity_l2, nested_convex_min)


def ball(G):
    return np.linalg.norm(G, axis=1) <= 1.0


def test_min_norm_point_edge_midpoint():
    d, p = min_norm_point(HullProblem([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0]))
    assert d == pytest.approx(math.sqrt(2) / 2, abs=1e-9)
    assert np.allclose(p, [0.5, 0.5], atol=1e-9)


def test_min_norm_point_inside():
    d, _ = min_norm_point(HullProblem([[1, 0], [-1, 1], [-1, -1]], [0.0, 0.0]))
    assert d == pytest.approx(0.0, abs=1e-7)


def test_min_norm_point_single_vertex():
    d, p = min_norm_point(HullProblem([[3.0, 4.0]], [0.0, 0.0]))
    assert d == 5.0 and p.tolist() == [3.0, 4.0]


@pytest.mark.parametrize("V,q", [([], [0.0]), ([[1.0, 2.0]], [0.0])])
def test_hull_problem_validation(V, q):
    with pytest.raises(ValueError):
        HullProblem(V, q)


def test_min_norm_point_tol():
    with pytest.raises(ValueError):
        min_norm_point(HullProblem([[1.0]], [0.0]), tol=0.0)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_min_norm_point_matches_grid(seed):
    rng = np.random.default_rng(seed)
    V = rng.uniform(-1, 1, (int(rng.integers(1, 6)), 2))
    q = rng.uniform(-2, 2, 2)
    d, p = min_norm_point(HullProblem(V, q))
    # the returned point is a convex combination: no closer point on any segment
    assert np.linalg.norm(p - q) == pytest.approx(d, abs=1e-12)
    lam = np.linspace(0, 1, 201)
    for a in V:
        for b in V:
            seg = lam[:, None] * a + (1 - lam[:, None]) * b
            assert np.min(np.linalg.norm(seg - q, axis=1)) >= d - 1e-9


def test_geo2_single_point():
    res = geo2_check([[1.2, 0.0]], 200, 0)
    assert res.rhs == pytest.approx(math.sqrt(0.44), abs=1e-12)
    assert res.samples == 200 and res.passed


def test_geo2_sphere_points():
    res = geo2_check([[1.0, 0.0], [0.0, -1.0]], 50, 0, max_tries=500)
    assert res.rhs == 0.0 and res.samples == 0 and res.max_lhs == 0.0


def test_geo2_special_vectors():
    params = NormFamilyParams.make(1 / 48, 3)
    sv = special_vectors(params, 2)
    res = geo2_check([sv.z1, sv.z2, -sv.z1, -sv.z2], 200, 1)
    assert res.passed
    assert res.rhs == pytest.approx(math.sqrt(1 + 1 / 4) / 48, rel=1e-9)
    assert res.max_lhs <= 5 / 48


def test_geo2_rejects_inner_points():
    with pytest.raises(ValueError):
        geo2_check([[0.5, 0.0]], 10, 0)


def test_geo2_random_configs():
    rng = np.random.default_rng(2)
    for k in range(30):
        dim = int(rng.integers(2, 7))
        P = rng.normal(size=(int(rng.integers(1, 5)), dim))
        P *= (rng.uniform(1.0, 1.2, len(P)) / np.linalg.norm(P, axis=1))[:, None]
        assert geo2_check(P, 30, k).passed


def test_modulus_of_convexity():
    assert modulus_of_convexity_l2(0.0) == 0.0
    assert modulus_of_convexity_l2(2.0) == 1.0
    assert modulus_of_convexity_l2(1.0) == pytest.approx(1 - math.sqrt(3) / 2, abs=1e-15)
    for bad in (-0.1, 2.1):
        with pytest.raises(ValueError):
            modulus_of_convexity_l2(bad)


def test_delta_inequality():
    v = delta_ineq_check(1 / 48)
    assert v == pytest.approx((50 / 48) * math.sqrt(1 - 0.76 ** 2), abs=1e-15)
    assert round(v, 3) == 0.677
    assert delta_ineq_check(0.02) < 1
    assert delta_ineq_check(1e-9) < 1e-3
    for bad in (0.0, 0.03):
        with pytest.raises(ValueError):
            delta_ineq_check(bad)


def test_grid_ball():
    d = grid_distance(ball, [2.0, 0.0], ([-1, -1], [1, 1]), 1e-3)
    assert abs(d - 1.0) <= 1e-3


def test_grid_box_inside():
    box = lambda G: np.all(np.abs(G) <= [0.5, 0.3], axis=1)
    assert grid_distance(box, [0.1, -0.1], ([-0.5, -0.3], [0.5, 0.3]), 0.05) <= 0.05 * math.sqrt(2) / 2


def test_grid_cross_corner():
    cross = lambda G: np.abs(G).sum(1) <= 1.0
    step = 0.01
    d = grid_distance(cross, [1.0, 1.0], ([-1, -1], [1, 1]), step)
    assert abs(d - math.sqrt(2) / 2) <= step
    r = grid_distance(cross, [1.0, 1.0], ([-1, -1], [1, 1]), 0.1, refine_to=1e-6)
    assert abs(r - math.sqrt(2) / 2) <= 1e-5


@pytest.mark.parametrize("step", [0.2, 0.1, 0.05, 0.025])
def test_grid_error_bound(step):
    q = np.array([1.3, -0.4])
    d = grid_distance(ball, q, ([-1, -1], [1, 1]), step)
    true = np.linalg.norm(q) - 1
    assert true - 1e-12 <= d <= true + step * math.sqrt(2) / 2


def test_grid_errors():
    with pytest.raises(EmptyGridError):
        grid_distance(lambda G: np.zeros(len(G), bool), [0.0], ([-1], [1]), 0.1)
    with pytest.raises(ValueError):
        grid_distance(ball, [0.0, 0.0], ([-1, -1], [1, 1]), 0.0)


def test_nested_convex_min():
    F = lambda Y: np.abs(Y[:, 0] - 0.3) + (Y[:, 1] + 0.7) ** 2 + 1.0
    assert nested_convex_min(F, [-1, -1], [1, 1], 1e-9) == pytest.approx(1.0, abs=1e-8)
