import dataclasses
import math

import numpy as np
import pytest

from holonet import _core, _fallback
from holonet.flat_sets import BOX, CROSS, FlatnessProfile, FlatSetDescriptor, n_of_eps, sample_points
from holonet.nets import (NetCache, build_net, grid_counts, net_of_section, section_dim,
                          verify_net, write_net_csv)

SEGMENT = FlatSetDescriptor(CROSS, FlatnessProfile.holder(0.5), 1, (1.0,))
POINT = FlatSetDescriptor(CROSS, FlatnessProfile.holder(0.5), 1, ())


@pytest.mark.parametrize("k", [-2, 0, 3])
def test_singleton_net(k):
    net = build_net(POINT, k)
    assert net.points.tolist() == [[0.0]]
    assert verify_net(net, 20, 0) == (True, True)


def test_segment_net_eps_one():
    net = net_of_section(SEGMENT, 1.0)
    assert net.coords.ravel().tolist() == [-1.0, 0.0, 1.0]
    assert verify_net(dataclasses.replace(net, b=0.5), 500, 0) == (True, True)


def test_segment_net_eps_three():
    net = net_of_section(SEGMENT, 3.0)
    assert net.coords.ravel().tolist() == [-1.0]
    assert verify_net(dataclasses.replace(net, b=0.5), 500, 0) == (True, False)


def test_separation_failure_detected():
    net = net_of_section(SEGMENT, 1.0)
    assert verify_net(dataclasses.replace(net, a=1.5), 50, 0)[0] is False


def test_grid_step():
    counts = grid_counts([1.0, 0.5], 0.1)
    step = 0.1 / (2 * math.sqrt(2))
    assert counts.tolist() == [math.ceil(1 / step), math.ceil(0.5 / step)]
    assert grid_counts([], 1.0).size == 0


@pytest.mark.parametrize("shape", [BOX, CROSS])
@pytest.mark.parametrize("k", range(0, 9))
def test_standard_nets_are_nets(shape, k):
    K = FlatSetDescriptor.from_profile(shape, FlatnessProfile.holder(0.5), 6)
    net = build_net(K, k)
    assert net.section_dim == section_dim(K, k)
    assert net.a == net.eps == 2.0 ** -k
    assert net.b == 1.5 * net.eps
    assert verify_net(net, 1000, k) == (True, True)
    assert all(K.contains(p) for p in net.points)


def test_section_dim_clamped():
    K = FlatSetDescriptor.cross(0.9, 2)
    assert n_of_eps(K.profile, 2.0 ** -100) == 3
    assert section_dim(K, 100) == 2


def test_dense_in_k_not_only_section():
    K = FlatSetDescriptor.box(0.5, 6)
    for k in range(6):
        net = build_net(K, k)
        X = sample_points(K, 500, np.random.default_rng(k))
        gaps = np.array([net.nearest(x)[1] for x in X])
        assert gaps.max() <= 2.0 * net.eps


def test_nearest_and_within_agree():
    net = build_net(FlatSetDescriptor.cross(0.5, 6), 4)
    rng = np.random.default_rng(5)
    for x in rng.uniform(-1, 1, (50, 6)):
        j, d = net.nearest(x)
        brute = np.linalg.norm(net.points - x, axis=1)
        assert d == pytest.approx(brute.min(), abs=1e-12)
        idx, dd = net.within(x, d + 0.1)
        assert set(idx.tolist()) == set(np.flatnonzero(brute <= d + 0.1).tolist())
        assert np.allclose(dd, brute[idx], atol=1e-12)


def test_cache_and_determinism():
    K = FlatSetDescriptor.box(0.5, 4)
    a, b = NetCache().get(K, 5), NetCache().get(K, 5)
    assert np.array_equal(a.coords, b.coords)
    cache = NetCache()
    assert cache.get(K, 3) is cache.get(K, 3)


@pytest.mark.skipif(_core.BACKEND != "compiled", reason="compiled kernels not built")
@pytest.mark.parametrize("coeffs,eps,cross", [
    ((1.0, 0.3, 0.05), 0.1, True),
    ((0.5, 0.2), 0.03, False),
    ((1.0,), 0.25, True),
    ((), 1.0, False),
])
def test_backends_give_identical_nets(coeffs, eps, cross):
    c = np.array(coeffs, dtype=float)
    counts = grid_counts(c, eps)
    assert np.array_equal(_core.greedy_net(c, counts, eps, cross), _fallback.greedy_net(c, counts, eps, cross))


@pytest.mark.skipif(_core.BACKEND != "compiled", reason="compiled kernels not built")
def test_backends_agree_on_gauge2d():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p, y1, y2 = rng.normal(size=3)
        W = rng.normal(size=4)
        a = _core.gauge2d(abs(p), y1, y2, *W, 10.0, 1e-12, 200)
        b = _fallback.gauge2d(abs(p), y1, y2, *W, 10.0, 1e-12, 200)
        assert a[0] == pytest.approx(b[0], abs=1e-9)


def test_net_csv(tmp_path):
    K = FlatSetDescriptor.cross(0.5, 3)
    path = tmp_path / "nets.csv"
    write_net_csv(path, [build_net(K, 0), build_net(K, 1)])
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + len(build_net(K, 0)) + len(build_net(K, 1))
