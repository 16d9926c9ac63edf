"""Independent oracles: minimum-norm point of a polytope, grid scans, closed forms.

Nothing here imports the code it certifies, so agreement is a real check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from holonet import _rng


class IterationCapError(RuntimeError):
    pass


class EmptyGridError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HullProblem:
    vertices: np.ndarray
    query: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        q = np.asarray(self.query, dtype=float)
        if V.size == 0:
            raise ValueError("need at least one vertex")
        if V.shape[1] != q.shape[0]:
            raise ValueError("vertices and query differ in dimension")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "query", q)


def _affine_min(S):
    """Affine weights (summing to 1) of the min-norm point of aff(S)."""
    k = len(S)
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = S @ S.T
    A[:k, k] = 1.0
    A[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(problem: HullProblem, tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Wolfe's algorithm: distance from the query to conv(vertices) and the nearest point."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    V = problem.vertices - problem.query
    scale = max(1.0, float(np.max(np.sum(V * V, axis=1))))
    cap = 10 * len(V) * V.shape[1]
    active = [int(np.argmin(np.sum(V * V, axis=1)))]
    lam = np.ones(1)
    x = V[active[0]].copy()
    for _ in range(cap):
        j = int(np.argmin(V @ x))
        if x @ x - x @ V[j] <= tol * scale or j in active:
            return float(np.linalg.norm(x)), x + problem.query
        active.append(j)
        lam = np.append(lam, 0.0)
        for _ in range(cap):
            S = V[active]
            mu = _affine_min(S)
            if np.all(mu > 1e-14):
                lam = mu
                break
            neg = mu <= 1e-14
            theta = min(1.0, float(np.min(lam[neg] / (lam[neg] - mu[neg]))))
            lam = lam + theta * (mu - lam)
            keep = lam > 1e-14
            keep[np.argmax(lam)] = True
            active = [a for a, k in zip(active, keep) if k]
            lam = lam[keep]
            lam /= lam.sum()
        else:
            raise IterationCapError("min-norm-point inner loop hit its cap")
        x = lam @ V[active]
    raise IterationCapError(f"min-norm-point did not finish in {cap} iterations")


SCAN_POINTS = 9
BISECT_STEPS = 25
GRID_CHUNK = 1 << 20  # grid points evaluated at once


def _grid_axes(lo, hi, step):
    return [np.arange(a, b + 0.5 * step, step) for a, b in zip(lo, hi)]


def _grid(axes):
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))


def nested_convex_min(F, lo, hi, tol: float) -> float:
    """Minimum of a convex F over the box [lo, hi] by nested one-dimensional scans.

    ``F`` maps an (N, dim) array to N values. Partial minima of a convex
    function are convex, and the minimizer of a convex function of one
    variable lies within one cell of the argmin of equally spaced samples,
    so each scan keeps the two cells around its argmin and repeats until
    the interval is shorter than ``tol``. Scans run batched over all
    outer sample points.
    """
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    dim = len(lo)
    grid = np.linspace(0.0, 1.0, SCAN_POINTS)

    def solve(prefix, j):
        B = len(prefix)
        a = np.full(B, lo[j])
        b = np.full(B, hi[j])
        best = np.full(B, np.inf)
        rows = np.arange(B)
        while True:
            T = a[:, None] + (b - a)[:, None] * grid[None, :]
            cand = np.concatenate([np.repeat(prefix, SCAN_POINTS, axis=0), T.reshape(-1, 1)], axis=1)
            v = (F(cand) if j == dim - 1 else solve(cand, j + 1)).reshape(B, SCAN_POINTS)
            k = np.argmin(v, axis=1)
            best = np.minimum(best, v[rows, k])
            if float(np.max(b - a)) <= tol:
                return best
            a = T[rows, np.maximum(k - 1, 0)]
            b = T[rows, np.minimum(k + 1, SCAN_POINTS - 1)]

    return float(solve(np.zeros((1, 0)), 0)[0])


def _radial_excess(pred, y0, Y):
    """rho(y) - 1 clipped at 0, rho the gauge of the set about its interior point y0."""
    out = np.zeros(len(Y))
    outside = ~np.asarray(pred(Y), dtype=bool)
    if not outside.any():
        return out
    Z = Y[outside] - y0
    lo = np.zeros(len(Z))
    hi = np.ones(len(Z))
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        ok = np.asarray(pred(y0 + mid[:, None] * Z), dtype=bool)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    out[outside] = 1.0 / np.maximum(lo, 1e-300) - 1.0
    return out


def grid_distance(pred, query, box, step: float, refine_to: float | None = None) -> float:
    """Min distance from ``query`` to grid points of ``box`` satisfying ``pred``.

    ``pred`` maps an (N, dim) array to booleans and ``box`` is (lo, hi).
    With ``refine_to`` (convex sets with interior only) the scan result is
    refined by minimizing the exact penalty |y - q| + L (rho(y) - 1)_+ with
    nested scans, where rho is the gauge about the centroid of the feasible
    grid points, obtained by bisection on ``pred``. L = 2 diam(box) exceeds
    the Lagrange multiplier of the constraint rho <= 1, so the penalized
    minimum equals the distance.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    q = np.asarray(query, dtype=float)
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    G = _grid(_grid_axes(lo, hi, step))
    inside = np.asarray(pred(G), dtype=bool)
    if not inside.any():
        raise EmptyGridError("no grid point satisfies the predicate")
    plain = float(np.min(np.linalg.norm(G[inside] - q, axis=1)))
    if refine_to is None:
        return plain
    y0 = G[inside].mean(axis=0)
    if not bool(np.asarray(pred(y0[None, :]))[0]):
        raise EmptyGridError("centroid of the feasible grid points is not in the set")
    L = 2.0 * float(np.linalg.norm(hi - lo))

    def F(Y):
        return np.linalg.norm(Y - q, axis=1) + L * _radial_excess(pred, y0, Y)

    return min(plain, nested_convex_min(F, lo, hi, refine_to))


def gauge_grid(z1, z2, x, bound: float, step: float, refine_to: float) -> float:
    """Brute-force min over (c1, c2) of |x - c1 z1 - c2 z2|_2 + |c1| + |c2|.

    A plain grid scan of step ``step`` over |c_i| <= bound, evaluated in
    chunks of rows, then nested convex scans down to ``refine_to``.
    """
    z1, z2, x = (np.asarray(v, dtype=float) for v in (z1, z2, x))

    def f(C):
        R = x[None, :] - C[:, :1] * z1[None, :] - C[:, 1:] * z2[None, :]
        return np.linalg.norm(R, axis=1) + np.abs(C).sum(1)

    axis = np.arange(-bound, bound + 0.5 * step, step)
    plain = math.inf
    rows = max(1, GRID_CHUNK // len(axis))
    for start in range(0, len(axis), rows):
        plain = min(plain, float(f(_grid([axis[start:start + rows], axis])).min()))
    return min(plain, nested_convex_min(f, [-bound, -bound], [bound, bound], refine_to))


@dataclass(frozen=True)
class Geo2Result:
    max_lhs: float
    rhs: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_lhs <= self.rhs + 1e-9


class SamplingStarvation(RuntimeError):
    pass


def geo2_check(P, sample_budget: int, seed: int, max_tries: int | None = None) -> Geo2Result:
    """Max distance to conv(P) over sampled points of conv(P ∪ B) outside B, and sqrt(max|p|^2 - 1)."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    norms = np.linalg.norm(P, axis=1)
    if np.any(norms < 1.0 - 1e-12):
        raise ValueError("every point of P must have norm >= 1")
    rhs = math.sqrt(max(float(norms.max()) ** 2 - 1.0, 0.0))
    rng = _rng.stream(seed, "geo2")
    max_tries = 100 * sample_budget if max_tries is None else max_tries
    worst, kept, tries = 0.0, 0, 0
    dim = P.shape[1]
    while kept < sample_budget and tries < max_tries:
        tries += 1
        w = rng.dirichlet(np.full(len(P), 0.3))
        p = w @ P
        b = p / max(np.linalg.norm(p), 1e-300) + 10.0 ** rng.uniform(-3, 0.5) * rng.standard_normal(dim)
        b /= np.linalg.norm(b)
        lam = rng.uniform()
        x = lam * p + (1.0 - lam) * b
        if np.linalg.norm(x) <= 1.0:
            continue
        kept += 1
        worst = max(worst, min_norm_point(HullProblem(P, x))[0])
    if kept == 0 and rhs > 0:
        raise SamplingStarvation("no sampled point of the hull lies outside the ball")
    return Geo2Result(worst, rhs, kept)


def modulus_of_convexity_l2(eps: float) -> float:
    """1 - sqrt(1 - (eps/2)^2) for eps in [0, 2]."""
    if not 0.0 <= eps <= 2.0:
        raise ValueError(f"eps must lie in [0, 2], got {eps!r}")
    return 1.0 - math.sqrt(1.0 - (eps / 2.0) ** 2)


def delta_ineq_check(delta: float) -> float:
    if not 0.0 < delta <= 1.0 / 48.0:
        raise ValueError(f"delta must lie in (0, 1/48], got {delta!r}")
    ratio = (1.0 - 10.0 * delta) / (1.0 + 2.0 * delta)
    return (1.0 + 2.0 * delta) * math.sqrt(1.0 - ratio ** 2)
