"""Deterministic (eps, 3eps/2)-nets of the sections K ∩ E_{n(eps)}.

Level ``k`` uses ``eps = 2**-k``. Candidates form a symmetric grid with step
at most ``eps / (2 sqrt(m))`` in each of the ``m`` section coordinates and
are scanned in lexicographic order; a candidate is kept iff it lies at
distance ``>= eps`` from every point kept so far.
"""
from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from holonet import _core, _rng
from holonet.flat_sets import CROSS, FlatSetDescriptor, n_of_eps, sample_points, section


@dataclass(frozen=True, eq=False)
class NetLevel:
    level: int | None
    eps: float
    section_dim: int
    coords: np.ndarray = field(repr=False)  # (count, section_dim)
    section: FlatSetDescriptor = field(repr=False)
    a: float
    b: float

    @property
    def ambient_dim(self) -> int:
        return self.section.ambient_dim

    def __len__(self):
        return len(self.coords)

    @property
    def points(self) -> np.ndarray:
        out = np.zeros((len(self.coords), self.ambient_dim))
        out[:, : self.section_dim] = self.coords
        return out

    def center(self, j: int) -> np.ndarray:
        out = np.zeros(self.ambient_dim)
        out[: self.section_dim] = self.coords[j]
        return out

    @cached_property
    def tree(self) -> cKDTree | None:
        if self.section_dim == 0:
            return None
        return cKDTree(self.coords)

    def _split(self, x):
        m = self.section_dim
        return x[:m], float(np.linalg.norm(x[m:]))

    def nearest(self, x) -> tuple[int, float]:
        """Index of some nearest net point and the Euclidean distance to it."""
        head, tail = self._split(x)
        if self.section_dim == 0:
            return 0, tail
        d, j = self.tree.query(head)
        return int(j), float(math.hypot(d, tail))

    def within(self, x, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """Indices (ascending) and exact distances of net points with distance <= radius."""
        head, tail = self._split(x)
        if self.section_dim == 0:
            idx = np.zeros(1, dtype=np.intp) if tail <= radius else np.zeros(0, dtype=np.intp)
        else:
            if radius < tail:
                return np.zeros(0, dtype=np.intp), np.zeros(0)
            r = math.sqrt(radius * radius - tail * tail)
            idx = np.array(sorted(self.tree.query_ball_point(head, r * (1 + 1e-12) + 1e-300)), dtype=np.intp)
        return idx, self.distances(x, idx)

    def distances(self, x, idx) -> np.ndarray:
        """Exact Euclidean distances from x to the net points ``idx``."""
        head, tail = self._split(x)
        diff = self.coords[idx] - head
        return np.sqrt(np.sum(diff * diff, axis=1) + tail * tail)


def grid_counts(coeffs, eps: float) -> np.ndarray:
    """Per-coordinate grid half-counts giving step <= eps / (2 sqrt(m))."""
    m = len(coeffs)
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    step = eps / (2.0 * math.sqrt(m))
    return np.array([int(math.ceil(c / step)) if c > 0 else 0 for c in coeffs], dtype=np.int64)


def greedy_net(sec: FlatSetDescriptor, eps: float, m: int | None = None) -> np.ndarray:
    """Greedy net coordinates (count, m) of a section stored in its first m coordinates."""
    if m is None:
        m = len(sec.coeffs)
    coeffs = np.zeros(m)
    coeffs[: min(m, len(sec.coeffs))] = sec.coeffs[:m]
    counts = grid_counts(coeffs, eps)
    if m and float(np.prod(2.0 * counts + 1.0)) > 5e8:
        raise MemoryError(f"net at eps={eps:g} needs more than 5e8 grid candidates")
    return _core.greedy_net(np.ascontiguousarray(coeffs), counts, float(eps), sec.shape == CROSS)


def net_of_section(sec: FlatSetDescriptor, eps: float, level: int | None = None) -> NetLevel:
    m = len(sec.coeffs)
    coords = greedy_net(sec, eps, m)
    return NetLevel(level, eps, m, coords, sec, a=eps, b=1.5 * eps)


def section_dim(K: FlatSetDescriptor, k: int) -> int:
    # K lies in E_D, so sections beyond D are K itself
    return min(n_of_eps(K.profile, math.ldexp(1.0, -k)), K.ambient_dim)


class NetCache:
    """Lazily built, memoized net levels keyed by (K, k); safe across threads."""

    def __init__(self):
        self._levels = {}
        self._lock = threading.Lock()
        self._building = {}

    def get(self, K: FlatSetDescriptor, k: int) -> NetLevel:
        key = (K, k)
        with self._lock:
            hit = self._levels.get(key)
            if hit is not None:
                return hit
            lock = self._building.setdefault(key, threading.Lock())
        with lock:
            with self._lock:
                hit = self._levels.get(key)
            if hit is not None:
                return hit
            m = section_dim(K, k)
            net = net_of_section(section(K, m), math.ldexp(1.0, -k), level=k)
            with self._lock:
                self._levels[key] = net
                self._building.pop(key, None)
            return net

    def clear(self):
        with self._lock:
            self._levels.clear()


CACHE = NetCache()


def build_net(K: FlatSetDescriptor, k: int) -> NetLevel:
    return CACHE.get(K, int(k))


def verify_net(level: NetLevel, sample_budget: int, seed: int) -> tuple[bool, bool]:
    """Check a-separation over all pairs and b-density on sampled section points."""
    coords = level.coords
    if len(coords) > 1 and level.section_dim > 0:
        dmin, _ = cKDTree(coords).query(coords, k=2)
        a_ok = bool(np.all(dmin[:, 1] >= level.a - 1e-12))
    else:
        a_ok = True
    rng = _rng.stream(seed, "verify_net", level.section_dim)
    X = sample_points(level.section, sample_budget, rng)
    X = np.vstack([X, _section_extremes(level.section)])
    head = X[:, : level.section_dim]
    if level.section_dim == 0:
        gaps = np.linalg.norm(X, axis=1)
    else:
        d, _ = cKDTree(coords).query(head)
        gaps = np.hypot(d, np.linalg.norm(X[:, level.section_dim :], axis=1))
    return a_ok, bool(np.all(gaps <= level.b + 1e-12))


def _section_extremes(sec: FlatSetDescriptor) -> np.ndarray:
    if sec.shape == CROSS or np.count_nonzero(sec.c) <= 10:
        return sec.vertices()
    return sec.c[None, :]


def write_net_csv(path, nets):
    nets = list(nets)
    D = max(n.ambient_dim for n in nets)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "eps", "section_dim", "point_index"] + [f"coord_{i}" for i in range(D)])
        for net in nets:
            for j, p in enumerate(net.points):
                w.writerow([net.level, repr(net.eps), net.section_dim, j] + [repr(float(v)) for v in p])
