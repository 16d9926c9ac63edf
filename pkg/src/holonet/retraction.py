"""The retraction R onto a flat set and its empirical modulus of continuity."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from holonet import _rng
from holonet._parallel import map_ordered
from holonet.flat_sets import FlatSetDescriptor, n_of_eps, project_many, project_onto, sample_points
from holonet.whitney import ON_SET_TOL, partition_at

DISPLACEMENT_CONSTANT = 9.0
MODULUS_CONSTANT = 1520.0


def retract(K: FlatSetDescriptor, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (K.ambient_dim,):
        raise ValueError(f"expected a vector of dimension {K.ambient_dim}, got shape {x.shape}")
    p, d = project_onto(K, x)
    if d <= ON_SET_TOL:
        return p
    return partition_at(K, x, d).combination()


def retract_many(K: FlatSetDescriptor, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.array([retract(K, x) for x in X])


def sample_at_distance(K: FlatSetDescriptor, dists, rng, box: float = 2.0) -> np.ndarray:
    """One point per entry of ``dists`` at exactly that Euclidean distance from K.

    A uniform point y of the cube [-box, box]^D is projected to q in K and the
    query is q + d (y - q)/|y - q|; (y - q) is a normal direction at q, so the
    distance is exact.
    """
    dists = np.asarray(dists, dtype=float)
    out = np.empty((len(dists), K.ambient_dim))
    filled = 0
    while filled < len(dists):
        need = len(dists) - filled
        Y = rng.uniform(-box, box, size=(need, K.ambient_dim))
        Q, gap = project_many(K, Y)
        ok = gap > 1e-9
        Y, Q, gap = Y[ok], Q[ok], gap[ok]
        take = len(Y)
        U = (Y - Q) / gap[:, None]
        out[filled : filled + take] = Q + dists[filled : filled + take, None] * U
        filled += take
    return out


def stratified_distances(count: int, rng, lo: float = 1e-4, hi: float = 1.0) -> np.ndarray:
    """Log-uniform distances, split evenly over the decades of [lo, hi]."""
    edges = np.arange(math.floor(math.log10(lo)), math.ceil(math.log10(hi)))
    per = np.array_split(np.arange(count), len(edges))
    out = np.empty(count)
    for e, part in zip(edges, per):
        a = max(e, math.log10(lo))
        b = min(e + 1, math.log10(hi))
        out[part] = 10.0 ** rng.uniform(a, b, size=len(part))
    return out


@dataclass
class ModulusTable:
    t: np.ndarray
    omega_hat: np.ndarray
    pair_count: np.ndarray
    seed: int
    pair_budget: int

    def rows(self):
        return list(zip(self.t.tolist(), self.omega_hat.tolist(), self.pair_count.tolist()))


@dataclass
class HolderFit:
    exponent: float
    log_constant: float
    r_squared: float
    t_range: tuple[float, float]


def _modulus_at(K, t, pair_budget, seed, index, box):
    rng = _rng.stream(seed, "modulus", index)
    d = stratified_distances(pair_budget, rng)
    X = sample_at_distance(K, d, rng, box)
    U = rng.standard_normal(X.shape)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    Y = X + t * U
    RX = retract_many(K, X)
    RY = retract_many(K, Y)
    return float(np.max(np.linalg.norm(RX - RY, axis=1)))


def empirical_modulus(K: FlatSetDescriptor, t_grid, pair_budget: int, seed: int,
                      sampling_box: float = 2.0) -> ModulusTable:
    """omega_hat(t): max |R(x) - R(y)| over sampled pairs with |x - y| = t.

    Base points are stratified by distance to K over the decades of
    [1e-4, 1]; the table is made non-decreasing by a running max.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("empty t grid")
    if np.any(t_grid <= 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t grid must be positive and strictly ascending")
    if pair_budget < 100:
        raise ValueError("pair_budget must be >= 100")
    raw = map_ordered(lambda it: _modulus_at(K, it[1], pair_budget, seed, it[0], sampling_box),
                      enumerate(t_grid))
    omega = np.maximum.accumulate(np.array(raw))
    return ModulusTable(t_grid, omega, np.full(len(t_grid), pair_budget), seed, pair_budget)


def holder_fit(table: ModulusTable, t_min: float, t_max: float) -> HolderFit:
    """Least-squares slope of log omega_hat against log t on [t_min, t_max]."""
    sel = (table.t >= t_min) & (table.t <= t_max) & (table.omega_hat > 0)
    if sel.sum() < 5:
        raise ValueError("need at least 5 grid points with omega_hat > 0 in range")
    lt = np.log(table.t[sel])
    lw = np.log(table.omega_hat[sel])
    A = np.vstack([lt, np.ones_like(lt)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, lw, rcond=None)
    resid = lw - A @ np.array([slope, icpt])
    ss_tot = float(np.sum((lw - lw.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return HolderFit(float(slope), float(icpt), r2, (float(t_min), float(t_max)))


def modulus_envelope(profile, t: float) -> float:
    """20**n(t/20) * t, the shape of the modulus bound."""
    return 20.0 ** n_of_eps(profile, t / 20.0) * t


def implementation_constant(table: ModulusTable, profile) -> float:
    """Smallest C with omega_hat(t) <= C 20**n(t/20) t on the table."""
    return float(max(w / modulus_envelope(profile, t) for t, w in zip(table.t, table.omega_hat)))


def write_modulus_csv(path, table: ModulusTable):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "omega_hat", "pairs"])
        for t, om, n in table.rows():
            w.writerow([repr(t), repr(om), n])


def write_summary_json(path, K, fit: HolderFit, c_impl: float, seed: int, extra=None):
    rec = {
        "alpha_profile": K.profile.alpha if K.profile.kind == "holder" else list(K.profile.values),
        "fitted_exponent": fit.exponent,
        "C_impl": c_impl,
        "seed": seed,
    }
    if extra:
        rec.update(extra)
    with open(path, "w") as fh:
        json.dump(rec, fh, indent=2, sort_keys=True)


def displacement_ratios(K: FlatSetDescriptor, X) -> np.ndarray:
    """|R(x) - x| / d(x, K) for points off K (nan on K)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _, d = project_many(K, X)
    R = retract_many(K, X)
    disp = np.linalg.norm(R - X, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(d > ON_SET_TOL, disp / d, np.nan)


def interior_samples(K: FlatSetDescriptor, count: int, rng) -> np.ndarray:
    return sample_points(K, count, rng)
