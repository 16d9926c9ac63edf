"""Nearest point map onto a segment of e_1 under the union norm.

The union norm is min_n |.|_n, so the distance from x to K = [-a, a] e_1 is
the minimum over n (and the Euclidean tail) of min_t |x - t e_1|_n. Each
inner problem is convex in t and solved by golden-section search.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from holonet._parallel import map_ordered
from holonet.gauge import NormFamilyParams, norm_fine_n, norm_union, special_vectors, union_indices

T_TOL = 1e-10
TIE_TOL = 1e-8
GOLDEN_CAP = 200
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SegmentK:
    """K = [-a, a] e_1; N is the dimension of its support."""

    a: float
    N: int = 1

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"segment half width must be positive, got {self.a!r}")
        if self.N != 1:
            raise ValueError("only segments along e_1 (N = 1) are supported")

    def point(self, t: float, D: int) -> np.ndarray:
        out = np.zeros(D)
        out[0] = t
        return out

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return abs(x[0]) <= self.a + tol and float(np.linalg.norm(x[1:])) <= tol


def align_K(points) -> tuple[SegmentK, np.ndarray, np.ndarray]:
    """Rigid change of coordinates putting the hull of collinear points on [-a, a] e_1.

    Returns (segment, T, p) with T orthogonal, so that y = T (x - p) are the
    aligned coordinates. The first row of T is the diameter direction; the
    other rows come from Gram-Schmidt with column pivoting on the centered
    points, completed by the standard basis in order.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if len(P) < 2:
        raise ValueError("need at least two points with positive diameter")
    sq = ((P[:, None, :] - P[None, :, :]) ** 2).sum(-1)
    i, j = np.unravel_index(int(np.argmax(sq)), sq.shape)
    i, j = min(i, j), max(i, j)
    diam = math.sqrt(float(sq[i, j]))
    if diam <= 1e-12:
        raise ValueError("hull has zero diameter")
    p = 0.5 * (P[i] + P[j])
    D = P.shape[1]
    rows = [(P[j] - P[i]) / diam]
    scale = max(1.0, float(np.abs(P).max()))
    rest = list(P - p)
    while rest:
        resid = [v - sum((v @ r) * r for r in rows) for v in rest]
        norms = [float(np.linalg.norm(v)) for v in resid]
        k = int(np.argmax(norms))
        if norms[k] <= 1e-10 * scale:
            break
        rows.append(resid[k] / norms[k])
        rest.pop(k)
    if len(rows) > 1:
        raise ValueError(f"points span {len(rows)} dimensions; only segments are supported")
    for e in np.eye(D):
        if len(rows) == D:
            break
        v = e - sum((e @ r) * r for r in rows)
        nv = float(np.linalg.norm(v))
        if nv > 1e-8:
            rows.append(v / nv)
    return SegmentK(diam / 2.0), np.array(rows), p


def _golden(f, lo: float, hi: float, tol: float):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(GOLDEN_CAP):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    t, v = (c, fc) if fc <= fd else (d, fd)
    for end in (lo, hi):
        fe = f(end)
        if fe < v:
            t, v = end, fe
    return t, v


@dataclass(frozen=True)
class Candidate:
    n: int  # 0 is the Euclidean tail
    t: float
    dist: float


@dataclass(frozen=True, eq=False)
class NPMResult:
    point: np.ndarray
    dist: float
    n: int
    t: float
    ties: tuple[Candidate, ...] = field(default=())


def _segment_candidates(params, K, x):
    out = []
    for n in union_indices(params, x - K.point(0.0, params.D)):
        def f(t, n=n):
            return norm_fine_n(params, n, x - K.point(t, params.D))
        t, v = _golden(f, -K.a, K.a, T_TOL)
        out.append(Candidate(n, t, v))
    t0 = min(max(float(x[0]), -K.a), K.a)
    out.append(Candidate(0, t0, float(np.linalg.norm(x - K.point(t0, params.D)))))
    return out


def npm(params: NormFamilyParams, K: SegmentK, x) -> NPMResult:
    """Nearest point of K to x in the union norm, with all candidates within TIE_TOL."""
    x = np.asarray(x, dtype=float)
    if x.shape != (params.D,):
        raise ValueError(f"expected a vector of dimension {params.D}, got shape {x.shape}")
    if K.contains(x):
        return NPMResult(x.copy(), 0.0, 0, float(x[0]))
    cands = _segment_candidates(params, K, x)
    best = min(cands, key=lambda c: (c.dist, c.n == 0, c.n))
    ties = tuple(c for c in cands if c is not best and c.dist <= best.dist + TIE_TOL
                 and abs(c.t - best.t) > 1e-9)
    return NPMResult(K.point(best.t, params.D), best.dist, best.n, best.t, ties)


def euclidean_npm(K: SegmentK, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return K.point(min(max(float(x[0]), -K.a), K.a), len(x))


@dataclass(frozen=True, eq=False)
class DivergenceRow:
    n: int
    input_gap: float
    output_gap: float
    r1: np.ndarray
    r2: np.ndarray
    goal1: float
    goal2: float


def output_gap_bound(params: NormFamilyParams, eps: float) -> float:
    return eps * params.delta / (1.0 + params.delta)


def input_gap_bound(params: NormFamilyParams, eps: float, n: int) -> float:
    return 2.0 * eps * params.delta / n


def goal_bound(params: NormFamilyParams, eps: float) -> float:
    return 66.0 * eps * params.mu / params.delta ** 2


def _check_range(params, K, eps, n_range):
    n_range = list(n_range)
    if not n_range:
        raise ValueError("empty n range")
    if min(n_range) <= K.N or max(n_range) > params.M:
        raise ValueError(f"n range must lie in ({K.N}, {params.M}], got {min(n_range)}..{max(n_range)}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if K.a < eps * params.delta * (1.0 - 1e-12):
        raise ValueError("K must contain +-eps*delta*e_1")
    return n_range


def divergence_experiment(params: NormFamilyParams, K: SegmentK, eps: float, n_range) -> list[DivergenceRow]:
    """Nearest points of eps x_{1,n} and eps x_{2,n} and the union-norm gaps between them."""
    n_range = _check_range(params, K, eps, n_range)
    shift = K.point(eps * params.delta, params.D)

    def row(n):
        sv = special_vectors(params, n)
        r1 = npm(params, K, eps * sv.x1).point
        r2 = npm(params, K, eps * sv.x2).point
        return DivergenceRow(
            n,
            norm_union(params, eps * (sv.x1 - sv.x2))[0],
            norm_union(params, r1 - r2)[0],
            r1, r2,
            norm_union(params, r1 - shift)[0],
            norm_union(params, r2 + shift)[0],
        )

    return map_ordered(row, n_range)


def euclidean_contrast(params: NormFamilyParams, K: SegmentK, eps: float, n_range) -> list[tuple[int, float, float]]:
    """(n, input gap, output gap) for the Euclidean nearest point map on the same inputs."""
    n_range = _check_range(params, K, eps, n_range)
    out = []
    for n in n_range:
        sv = special_vectors(params, n)
        x1, x2 = eps * sv.x1, eps * sv.x2
        gap_out = float(np.linalg.norm(euclidean_npm(K, x1) - euclidean_npm(K, x2)))
        out.append((n, float(np.linalg.norm(x1 - x2)), gap_out))
    return out


def divergence_verdict(params: NormFamilyParams, eps: float, rows) -> dict:
    bound = output_gap_bound(params, eps)
    gaps = [r.input_gap for r in rows]
    min_out = min(r.output_gap for r in rows)
    inputs_ok = all(g <= input_gap_bound(params, eps, r.n) + 1e-12 for g, r in zip(gaps, rows))
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    goal = max(max(r.goal1, r.goal2) for r in rows)
    goal_ok = goal <= goal_bound(params, eps) + 1e-6
    return {
        "min_output_gap": min_out,
        "bound": bound,
        "max_goal_distance": goal,
        "goal_bound": goal_bound(params, eps),
        "input_gaps_bounded": inputs_ok,
        "input_gaps_decreasing": monotone,
        "pass": bool(min_out >= bound - 1e-6 and inputs_ok and monotone and goal_ok),
    }


def write_divergence_csv(path, params: NormFamilyParams, eps: float, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "input_gap", "output_gap", "lower_bound", "upper_bound_input"])
        for r in rows:
            w.writerow([r.n, repr(r.input_gap), repr(r.output_gap),
                        repr(output_gap_bound(params, eps)), repr(input_gap_bound(params, eps, r.n))])


def write_verdict_json(path, verdict: dict):
    with open(path, "w") as fh:
        json.dump(verdict, fh, indent=2, sort_keys=True)
