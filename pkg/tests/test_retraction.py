import math

import numpy as np
import pytest

from holonet.flat_sets import (CROSS, FlatnessProfile, FlatSetDescriptor, n_of_eps, project_many,
                               sample_points)
from holonet.retraction import (DISPLACEMENT_CONSTANT, ModulusTable, displacement_ratios,
                                empirical_modulus, holder_fit, implementation_constant,
                                modulus_envelope, retract, retract_many, sample_at_distance,
                                stratified_distances, write_modulus_csv, write_summary_json)

POINT = FlatSetDescriptor(CROSS, FlatnessProfile.holder(0.5), 1, ())
SEGMENT = FlatSetDescriptor.from_profile(CROSS, FlatnessProfile.explicit([1.0, 0.0, 0.0]), 2)
SETS = [FlatSetDescriptor.box(0.5, 6), FlatSetDescriptor.cross(0.5, 6)]


def test_identity_on_k():
    for K in SETS:
        X = sample_points(K, 300, np.random.default_rng(0))
        assert np.array_equal(retract_many(K, X), X)


def test_point_target():
    assert retract(POINT, [0.75]).tolist() == [0.0]
    assert retract(POINT, [-40.0]).tolist() == [0.0]


def test_segment_target():
    assert np.allclose(retract(SEGMENT, [2.0, 0.0]), [1 / 3, 0.0], atol=1e-15)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        retract(SETS[0], np.zeros(5))


@pytest.mark.parametrize("K", SETS, ids=["box", "cross"])
def test_range_and_displacement(K):
    rng = np.random.default_rng(1)
    d = stratified_distances(400, rng)
    X = sample_at_distance(K, d, rng)
    R = retract_many(K, X)
    _, back = project_many(K, R)
    assert back.max() <= 1e-10
    disp = np.linalg.norm(R - X, axis=1)
    assert np.all(disp <= DISPLACEMENT_CONSTANT * d + 1e-9)
    assert np.all(disp <= 7 * d + 1e-9)


def test_displacement_ratios_nan_on_k():
    K = SETS[0]
    X = np.vstack([np.zeros(6), sample_at_distance(K, [0.1], np.random.default_rng(2))])
    r = displacement_ratios(K, X)
    assert math.isnan(r[0]) and 0 < r[1] <= 7


def test_sample_at_distance_is_exact():
    for K in SETS:
        rng = np.random.default_rng(3)
        d = 10.0 ** rng.uniform(-4, 0, 200)
        _, got = project_many(K, sample_at_distance(K, d, rng))
        assert np.allclose(got, d, rtol=1e-9, atol=1e-15)


def test_stratified_distances_cover_decades():
    d = stratified_distances(400, np.random.default_rng(4))
    assert d.min() >= 1e-4 and d.max() <= 1.0
    counts = np.histogram(np.log10(d), bins=[-4, -3, -2, -1, 0])[0]
    assert counts.tolist() == [100, 100, 100, 100]


def _case_pairs(K, count, seed):
    """Pairs (x, y) with y between x and its projection, so d(y) = s d(x) < d(x)/2.

    d(y) stays in the sampled range [1e-4, 1] or is exactly 0: nets for
    queries much closer to K are too large to build.
    """
    rng = np.random.default_rng(seed)
    d = stratified_distances(count, rng, 1e-3, 1.0)
    X = sample_at_distance(K, d, rng)
    Q, _ = project_many(K, X)
    s = rng.uniform(1e-4 / d, 0.5)
    s[::10] = 0.0
    return X, Q + s[:, None] * (X - Q)


@pytest.mark.parametrize("K", SETS, ids=["box", "cross"])
def test_near_far_case(K):
    # d(y, K) < d(x, K)/2
    X, Y = _case_pairs(K, 300, 5)
    r = np.linalg.norm(retract_many(K, X) - retract_many(K, Y), axis=1) / np.linalg.norm(X - Y, axis=1)
    assert r.max() <= 28


@pytest.mark.parametrize("K", SETS, ids=["box", "cross"])
def test_comparable_distance_case(K):
    # |x - y| >= d(x, K) and d(y, K) >= d(x, K)/2
    rng = np.random.default_rng(6)
    d = stratified_distances(600, rng)
    X = sample_at_distance(K, d, rng)
    U = rng.normal(size=X.shape)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    Y = X + d[:, None] * rng.uniform(1, 10, (len(d), 1)) * U
    _, dy = project_many(K, Y)
    keep = dy >= d / 2
    assert keep.sum() > 200
    r = np.linalg.norm(retract_many(K, X[keep]) - retract_many(K, Y[keep]), axis=1) \
        / np.linalg.norm(X[keep] - Y[keep], axis=1)
    assert r.max() <= 55


def test_local_lipschitz_scaling():
    K = SETS[1]
    rng = np.random.default_rng(7)
    d = stratified_distances(400, rng)
    X = sample_at_distance(K, d, rng)
    U = rng.normal(size=X.shape)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    Y = X + (d * rng.uniform(1, 3, len(d)))[:, None] * U
    _, dy = project_many(K, Y)
    t = np.minimum(d, dy)
    ok = t > 0
    ratio = np.linalg.norm(retract_many(K, X[ok]) - retract_many(K, Y[ok]), axis=1) \
        / np.linalg.norm(X[ok] - Y[ok], axis=1)
    env = np.array([20.0 ** n_of_eps(K.profile, s / 20) for s in t[ok]])
    assert np.max(ratio / env) <= 1520


def _table(t, w):
    t = np.asarray(t, dtype=float)
    return ModulusTable(t, np.asarray(w, dtype=float), np.full(len(t), 100), 0, 100)


def test_holder_fit_linear():
    t = np.geomspace(1e-4, 1e-1, 8)
    fit = holder_fit(_table(t, t), 1e-4, 1e-1)
    assert fit.exponent == pytest.approx(1.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_holder_fit_sqrt():
    t = np.geomspace(1e-4, 1e-1, 8)
    fit = holder_fit(_table(t, 3 * np.sqrt(t)), 1e-4, 1e-1)
    assert fit.exponent == pytest.approx(0.5, abs=1e-12)
    assert fit.log_constant == pytest.approx(math.log(3), abs=1e-12)


def test_holder_fit_needs_data():
    t = np.geomspace(1e-4, 1e-1, 8)
    with pytest.raises(ValueError):
        holder_fit(_table(t, np.zeros(8)), 1e-4, 1e-1)
    with pytest.raises(ValueError):
        holder_fit(_table(t, t), 1e-2, 1e-1)


def test_modulus_of_constant_retraction():
    table = empirical_modulus(POINT, [1e-3, 1e-2, 1e-1], 100, 0)
    assert table.omega_hat.tolist() == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("grid,budget", [([], 100), ([0.1, 0.01], 100), ([-1.0, 1.0], 100), ([0.1], 50)])
def test_modulus_input_errors(grid, budget):
    with pytest.raises(ValueError):
        empirical_modulus(SETS[0], grid, budget, 0)


def test_modulus_table_and_writers(tmp_path):
    K = SETS[0]
    t = np.geomspace(1e-3, 1e-1, 5)
    a = empirical_modulus(K, t, 100, 3)
    b = empirical_modulus(K, t, 100, 3)
    assert np.array_equal(a.omega_hat, b.omega_hat)
    assert np.all(np.diff(a.omega_hat) >= 0)
    c = implementation_constant(a, K.profile)
    assert all(w <= c * modulus_envelope(K.profile, s) * (1 + 1e-12) for s, w in zip(t, a.omega_hat))
    write_modulus_csv(tmp_path / "m.csv", a)
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "t,omega_hat,pairs"
    write_summary_json(tmp_path / "s.json", K, holder_fit(a, 1e-3, 1e-1), c, 3)
    assert "fitted_exponent" in (tmp_path / "s.json").read_text()
