"""Flat compact convex targets: boxes and weighted cross-polytopes.

A set is described by its flatness profile ``r_n`` and an ambient dimension
``D``. The box has half-widths ``c_k = 2**-k * r_{k-1}`` and the
cross-polytope is the weighted l1 ball ``sum |x_k| / c_k <= 1`` with
``c_k = r_{k-1}``. Coordinates are 0-based in code: ``x[k-1]`` is the
coefficient of ``e_k``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from holonet import _rng

BOX = "box"
CROSS = "cross"
SHAPES = (BOX, CROSS)

MEMBER_TOL = 1e-12


class RangeError(ValueError):
    """An index falls outside the stored or admissible range."""


@dataclass(frozen=True)
class FlatnessProfile:
    """Sequence ``r_0, r_1, ...`` bounding the heights of a flat set.

    ``kind="holder"`` stores only ``alpha`` and uses ``r_n = 20**(n/(alpha-1))``;
    ``kind="explicit"`` stores a finite non-increasing list.
    """

    kind: str
    alpha: float | None = None
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "holder":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ValueError(f"holder profile needs alpha in (0, 1), got {self.alpha!r}")
        elif self.kind == "explicit":
            vals = self.values
            if not vals:
                raise ValueError("explicit profile needs at least one value")
            if vals[0] <= 0 or any(v < 0 for v in vals):
                raise ValueError("explicit profile values must be non-negative with r_0 > 0")
            if any(b > a for a, b in zip(vals, vals[1:])):
                raise ValueError("explicit profile must be non-increasing")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def holder(cls, alpha: float) -> "FlatnessProfile":
        return cls("holder", alpha=float(alpha))

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "FlatnessProfile":
        return cls("explicit", values=tuple(float(v) for v in values))

    @property
    def ratio(self) -> float:
        """Common ratio ``r_{n+1} / r_n`` of a Hölder profile."""
        if self.kind != "holder":
            raise ValueError("only holder profiles have a constant ratio")
        return 20.0 ** (1.0 / (self.alpha - 1.0))

    def r(self, n: int) -> float:
        return r_value(self, n)

    def n_of_eps(self, eps: float) -> int:
        return n_of_eps(self, eps)

    def to_record(self) -> dict:
        if self.kind == "holder":
            return {"alpha": self.alpha}
        return {"r": list(self.values)}


def r_value(profile: FlatnessProfile, n: int) -> float:
    if n < 0:
        raise RangeError(f"profile index must be >= 0, got {n}")
    if profile.kind == "holder":
        return 20.0 ** (n / (profile.alpha - 1.0))
    if n >= len(profile.values):
        raise RangeError(f"explicit profile stores r_0..r_{len(profile.values) - 1}, asked for r_{n}")
    return profile.values[n]


def n_of_eps(profile: FlatnessProfile, eps: float) -> int:
    """Smallest ``n >= 0`` with ``r_n <= eps``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if profile.kind == "holder":
        # start from the closed-form guess, then settle the boundary exactly
        guess = max(0, int(math.floor(math.log(eps) / math.log(profile.ratio))) - 1)
        n = guess
        while n > 0 and r_value(profile, n - 1) <= eps:
            n -= 1
        while r_value(profile, n) > eps:
            n += 1
        return n
    for n, v in enumerate(profile.values):
        if v <= eps:
            return n
    raise RangeError(f"no stored r_n <= {eps!r}; extend the explicit profile")


@dataclass(frozen=True)
class FlatSetDescriptor:
    """Box or weighted cross-polytope in R^D.

    ``coeffs`` may be shorter than ``ambient_dim``; missing coefficients are
    zero, which pins those coordinates to 0 (this is how sections are stored).
    """

    shape: str
    profile: FlatnessProfile
    ambient_dim: int
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if self.ambient_dim < 1:
            raise ValueError("ambient_dim must be positive")
        if len(self.coeffs) > self.ambient_dim:
            raise ValueError("more coefficients than ambient dimensions")
        if any(c < 0 for c in self.coeffs):
            raise ValueError("coefficients must be non-negative")

    @classmethod
    def from_profile(cls, shape: str, profile: FlatnessProfile, ambient_dim: int) -> "FlatSetDescriptor":
        if shape == BOX:
            coeffs = tuple(2.0 ** -k * r_value(profile, k - 1) for k in range(1, ambient_dim + 1))
        elif shape == CROSS:
            coeffs = tuple(r_value(profile, k - 1) for k in range(1, ambient_dim + 1))
        else:
            raise ValueError(f"shape must be one of {SHAPES}, got {shape!r}")
        return cls(shape, profile, int(ambient_dim), coeffs)

    @classmethod
    def box(cls, alpha: float, ambient_dim: int) -> "FlatSetDescriptor":
        return cls.from_profile(BOX, FlatnessProfile.holder(alpha), ambient_dim)

    @classmethod
    def cross(cls, alpha: float, ambient_dim: int) -> "FlatSetDescriptor":
        return cls.from_profile(CROSS, FlatnessProfile.holder(alpha), ambient_dim)

    @property
    def c(self) -> np.ndarray:
        """Coefficients padded with zeros to length D."""
        out = np.zeros(self.ambient_dim)
        out[: len(self.coeffs)] = self.coeffs
        return out

    def contains(self, x, tol: float = MEMBER_TOL) -> bool:
        x = _as_vector(self, x)
        c = self.c
        pinned = c == 0
        if np.any(x[pinned] != 0):
            return False
        if self.shape == BOX:
            return bool(np.all(np.abs(x) <= c))
        free = ~pinned
        return bool(np.sum(np.abs(x[free]) / c[free]) <= 1.0 + tol)

    def vertices(self) -> np.ndarray:
        """Extreme points (cross-polytope) or all sign corners (box, small D only)."""
        c = self.c
        free = np.flatnonzero(c > 0)
        if self.shape == CROSS:
            out = []
            for k in free:
                for s in (1.0, -1.0):
                    v = np.zeros(self.ambient_dim)
                    v[k] = s * c[k]
                    out.append(v)
            return np.array(out) if out else np.zeros((1, self.ambient_dim))
        if len(free) > 16:
            raise ValueError("too many box corners to enumerate")
        corners = []
        for signs in np.ndindex(*(2,) * len(free)):
            v = np.zeros(self.ambient_dim)
            v[free] = np.where(np.array(signs, dtype=bool), -1.0, 1.0) * c[free]
            corners.append(v)
        return np.array(corners) if corners else np.zeros((1, self.ambient_dim))

    def to_record(self) -> dict:
        rec = {"shape": self.shape, **self.profile.to_record(), "ambient_dim": self.ambient_dim}
        if len(self.coeffs) < self.ambient_dim:
            rec["section"] = len(self.coeffs)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "FlatSetDescriptor":
        if "alpha" in rec:
            profile = FlatnessProfile.holder(rec["alpha"])
        elif "r" in rec:
            profile = FlatnessProfile.explicit(rec["r"])
        else:
            raise ValueError("descriptor record needs 'alpha' or 'r'")
        K = cls.from_profile(rec["shape"], profile, int(rec["ambient_dim"]))
        if "section" in rec:
            K = section(K, int(rec["section"]))
        return K


def _as_vector(K: FlatSetDescriptor, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (K.ambient_dim,):
        raise ValueError(f"expected a vector of dimension {K.ambient_dim}, got shape {x.shape}")
    return x


def _project_weighted_l1(X: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Rows of X projected onto {sum |x_k| / c_k <= 1} (all c_k > 0), by sorting."""
    a = np.abs(X)
    w = 1.0 / c
    z = a * c  # threshold at which coordinate k is zeroed
    order = np.argsort(-z, axis=1, kind="stable")
    a_s = np.take_along_axis(a, order, axis=1)
    w_s = w[order]
    z_s = np.take_along_axis(z, order, axis=1)
    theta = (np.cumsum(w_s * a_s, axis=1) - 1.0) / np.cumsum(w_s * w_s, axis=1)
    valid = z_s > theta
    rho = valid.shape[1] - 1 - np.argmax(valid[:, ::-1], axis=1)
    th = np.maximum(theta[np.arange(len(X)), rho], 0.0)
    return np.sign(X) * np.maximum(a - th[:, None] * w, 0.0)


def project_many(K: FlatSetDescriptor, X) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise nearest points in K and Euclidean distances."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != K.ambient_dim:
        raise ValueError(f"expected vectors of dimension {K.ambient_dim}, got {X.shape[1]}")
    c = K.c
    if K.shape == BOX:
        P = np.clip(X, -c, c)
    else:
        P = np.zeros_like(X)
        free = c > 0
        if free.any():
            Xf = X[:, free]
            inside = np.sum(np.abs(Xf) / c[free], axis=1) <= 1.0 + MEMBER_TOL
            Pf = Xf.copy()
            if (~inside).any():
                Pf[~inside] = _project_weighted_l1(Xf[~inside], c[free])
            P[:, free] = Pf
    dist = np.linalg.norm(X - P, axis=1)
    return P, dist


def project_onto(K: FlatSetDescriptor, x) -> tuple[np.ndarray, float]:
    """Exact Euclidean nearest point of K to x, and the distance."""
    x = _as_vector(K, x)
    if K.contains(x):
        return x.copy(), 0.0
    P, d = project_many(K, x[None, :])
    return P[0], float(d[0])


def distance(K: FlatSetDescriptor, x) -> float:
    return project_onto(K, x)[1]


def section(K: FlatSetDescriptor, m: int) -> FlatSetDescriptor:
    """K intersected with span(e_1..e_m)."""
    if m < 0 or m > K.ambient_dim:
        raise RangeError(f"section index must be in [0, {K.ambient_dim}], got {m}")
    return FlatSetDescriptor(K.shape, K.profile, K.ambient_dim, K.coeffs[:m])


def sample_points(K: FlatSetDescriptor, count: int, rng) -> np.ndarray:
    """Points of K: uniform for the box, random-face mixtures for the cross-polytope."""
    c = K.c
    if K.shape == BOX:
        return rng.uniform(-1.0, 1.0, size=(count, K.ambient_dim)) * c
    free = np.flatnonzero(c > 0)
    X = np.zeros((count, K.ambient_dim))
    if len(free) == 0:
        return X
    weights = rng.dirichlet(np.ones(len(free)), size=count)
    # mix surface points with interior ones
    weights *= rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / len(free))
    signs = rng.choice([-1.0, 1.0], size=(count, len(free)))
    X[:, free] = signs * weights * c[free]
    return X


@dataclass(frozen=True)
class HeightEstimate:
    n: int
    lower_bound: float
    budget: int
    seed: int


def estimate_height(K: FlatSetDescriptor, n: int, budget: int, seed: int) -> HeightEstimate:
    """Certified lower bound on sup_{x in K} d(x, K ∩ E_n) by sampling.

    The extreme points where the supremum is attained (cross-polytope
    vertices, the positive box corner) are always added to the sample.
    The sample does not depend on ``n``, so estimates are monotone in ``n``.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    n_eff = min(n, K.ambient_dim)
    rng = _rng.stream(seed, "height")
    X = sample_points(K, budget, rng)
    if K.shape == CROSS:
        extra = K.vertices()
    else:
        extra = K.c[None, :]
    X = np.vstack([X, extra])
    _, d = project_many(section(K, n_eff), X)
    return HeightEstimate(n, float(d.max()), budget, seed)


def write_heights_csv(path, K: FlatSetDescriptor, estimates: Sequence[HeightEstimate]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "r_n", "height_lower_bound", "budget", "seed"])
        for h in estimates:
            w.writerow([h.n, repr(r_value(K.profile, h.n)), repr(h.lower_bound), h.budget, h.seed])
