import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holonet.flat_sets import (BOX, CROSS, FlatnessProfile, FlatSetDescriptor, RangeError, distance,
                               estimate_height, n_of_eps, project_many, project_onto, r_value,
                               sample_points, section)
from holonet.oracles import HullProblem, min_norm_point


@pytest.mark.parametrize("alpha,n,expected", [
    (0.5, 0, 1.0),
    (0.5, 1, 0.0025),
    (0.75, 2, 20.0 ** -8),
])
def test_r_value(alpha, n, expected):
    assert r_value(FlatnessProfile.holder(alpha), n) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("eps,expected", [(1.0, 0), (0.9, 1), (0.002, 2)])
def test_n_of_eps(eps, expected):
    assert n_of_eps(FlatnessProfile.holder(0.5), eps) == expected


@given(st.floats(0.05, 0.95), st.floats(1e-12, 2.0))
def test_n_of_eps_is_minimal_and_log_bounded(alpha, eps):
    prof = FlatnessProfile.holder(alpha)
    n = n_of_eps(prof, eps)
    assert prof.r(n) <= eps
    if n > 0:
        assert prof.r(n - 1) > eps
    assert n <= math.log(eps ** (alpha - 1.0), 20) + 1 + 1e-9


def test_holder_ratio_is_constant():
    prof = FlatnessProfile.holder(0.6)
    ratios = [prof.r(n + 1) / prof.r(n) for n in range(8)]
    assert np.allclose(ratios, 20.0 ** (1 / (0.6 - 1)), rtol=1e-12)
    assert prof.r(0) == 1.0


def test_explicit_profile_range():
    prof = FlatnessProfile.explicit([1.0, 0.5, 0.0])
    assert prof.r(2) == 0.0
    assert n_of_eps(prof, 0.7) == 1
    with pytest.raises(RangeError):
        prof.r(3)
    with pytest.raises(RangeError):
        FlatnessProfile.explicit([1.0, 0.5]).n_of_eps(0.1)


@pytest.mark.parametrize("vals", [[], [0.0], [1.0, 2.0], [1.0, -0.1]])
def test_explicit_profile_rejects(vals):
    with pytest.raises(ValueError):
        FlatnessProfile.explicit(vals)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.3, 1.5])
def test_holder_profile_rejects_alpha(alpha):
    with pytest.raises(ValueError):
        FlatnessProfile.holder(alpha)


def test_standard_coefficients():
    box = FlatSetDescriptor.box(0.5, 3)
    cross = FlatSetDescriptor.cross(0.5, 3)
    assert np.allclose(box.c, [0.5, 0.25 * 0.0025, 0.125 * 0.0025 ** 2], rtol=1e-14)
    assert np.allclose(cross.c, [1.0, 0.0025, 0.0025 ** 2], rtol=1e-14)


def test_box_projection_example():
    K = FlatSetDescriptor.box(0.5, 2)
    p, d = project_onto(K, [0.7, 0.3])
    assert np.allclose(p, [0.5, 0.000625], rtol=0, atol=1e-15)
    assert d == pytest.approx(math.hypot(0.2, 0.3 - 0.000625), rel=1e-14)


def test_cross_projection_example():
    K = FlatSetDescriptor(CROSS, FlatnessProfile.holder(0.5), 2, (1.0, 0.0025))
    p, d = project_onto(K, [2.0, 0.0])
    assert np.allclose(p, [1.0, 0.0], atol=1e-15)
    assert d == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("shape", [BOX, CROSS])
def test_points_of_k_are_fixed(shape):
    K = FlatSetDescriptor.from_profile(shape, FlatnessProfile.holder(0.5), 4)
    X = sample_points(K, 200, np.random.default_rng(3))
    P, d = project_many(K, X)
    assert np.array_equal(P, X)
    assert np.all(d == 0.0)


@settings(max_examples=60)
@given(st.sampled_from([BOX, CROSS]), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_projection_idempotent_and_member(shape, D, seed):
    K = FlatSetDescriptor.from_profile(shape, FlatnessProfile.holder(0.4), D)
    x = np.random.default_rng(seed).normal(scale=2.0, size=D)
    p, _ = project_onto(K, x)
    assert K.contains(p)
    assert np.array_equal(project_onto(K, p)[0], p)


@settings(max_examples=60)
@given(st.sampled_from([BOX, CROSS]), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_projection_matches_min_norm_point(shape, D, seed):
    rng = np.random.default_rng(seed)
    coeffs = tuple(rng.uniform(0.1, 2.0, D))
    K = FlatSetDescriptor(shape, FlatnessProfile.holder(0.5), D, coeffs)
    x = rng.uniform(-3, 3, D)
    d_ref, _ = min_norm_point(HullProblem(K.vertices(), x))
    assert distance(K, x) == pytest.approx(d_ref, abs=1e-6)


def test_projection_is_symmetric():
    K = FlatSetDescriptor.cross(0.5, 3)
    x = np.array([0.3, -0.7, 0.2])
    assert np.array_equal(project_onto(K, -x)[0], -project_onto(K, x)[0])


def test_projection_dimension_mismatch():
    with pytest.raises(ValueError):
        project_onto(FlatSetDescriptor.box(0.5, 3), [1.0, 2.0])


def test_sections():
    K = FlatSetDescriptor.box(0.5, 4)
    s0 = section(K, 0)
    assert project_onto(s0, [0.3, 0.1, 0.0, 0.0])[0].tolist() == [0.0] * 4
    s2 = section(K, 2)
    assert s2.coeffs == K.coeffs[:2]
    seg = section(FlatSetDescriptor.cross(0.5, 3), 1)
    assert project_onto(seg, [2.0, 1.0, 0.0])[0].tolist() == [1.0, 0.0, 0.0]
    with pytest.raises(RangeError):
        section(K, 5)


def test_record_roundtrip():
    K = FlatSetDescriptor.cross(0.7, 5)
    assert FlatSetDescriptor.from_record(K.to_record()) == K


def test_height_of_singleton_and_full_section():
    point = FlatSetDescriptor(BOX, FlatnessProfile.holder(0.5), 3, ())
    assert estimate_height(point, 0, 50, 1).lower_bound == 0.0
    K = FlatSetDescriptor.box(0.5, 3)
    assert estimate_height(K, 3, 50, 1).lower_bound == 0.0
    assert estimate_height(K, 7, 50, 1).lower_bound == 0.0


def test_cross_height_zero_is_attained_at_vertex():
    K = FlatSetDescriptor.cross(0.5, 4)
    h = estimate_height(K, 0, 10_000, 0).lower_bound
    assert 0.99 < h <= 1.0


@pytest.mark.parametrize("shape", [BOX, CROSS])
@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_heights_below_profile_and_monotone(shape, alpha):
    K = FlatSetDescriptor.from_profile(shape, FlatnessProfile.holder(alpha), 5)
    hs = [estimate_height(K, n, 500, 2).lower_bound for n in range(6)]
    assert all(h <= K.profile.r(n) + 1e-12 for n, h in enumerate(hs))
    assert all(b <= a for a, b in zip(hs, hs[1:]))


def test_height_deterministic():
    K = FlatSetDescriptor.box(0.5, 4)
    assert estimate_height(K, 1, 300, 9) == estimate_height(K, 1, 300, 9)
    with pytest.raises(ValueError):
        estimate_height(K, 1, 0, 9)
