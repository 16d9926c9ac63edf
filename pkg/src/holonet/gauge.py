"""A rotund renorming of l2, truncated to R^D.

For each n the body conv(P_n ∪ B_l2), P_n = {±z_{1,n}, ±z_{2,n}}, has gauge

    ||x||_n = min_{c1, c2} |x - c1 z_{1,n} - c2 z_{2,n}|_2 + |c1| + |c2|,

the infimal convolution of the Euclidean norm with the l1 gauge of
conv(±z_1, ±z_2). The z's live on e_1, e_{2n}, e_{2n+1}, so the program
only sees those three coordinates plus the Euclidean norm of the rest.
The rotund norms are |x|_n = (1 - mu/n^2)||x||_n + (mu/n^2)|x|_2 and the
final norm is the gauge of the union of their unit balls, min_n |x|_n.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from holonet import _core, _rng

GAUGE_TOL = 1e-9
GOLDEN_CAP = 200
UNION_TIE_REL = 1e-12


class GaugeToleranceError(RuntimeError):
    """The gauge program did not reach its tolerance within the iteration cap."""


class SamplingStarvation(RuntimeError):
    """A rejection sampler found no admissible point within its budget."""


def max_mu(delta: float) -> float:
    return delta ** 3 / (132.0 * (1.0 + 2.0 * delta))


def delta_ineq_value(delta: float) -> float:
    """(1+2d) sqrt(1 - ((1-10d)/(1+2d))^2); must be < 1."""
    q = (1.0 - 10.0 * delta) / (1.0 + 2.0 * delta)
    return (1.0 + 2.0 * delta) * math.sqrt(1.0 - q * q)


@dataclass(frozen=True)
class NormFamilyParams:
    delta: float
    mu: float
    M: int
    D: int

    def __post_init__(self):
        d, mu = self.delta, self.mu
        if not 0.0 < d <= 1.0 / 48.0:
            raise ValueError(f"NormFamilyParams: delta must lie in (0, 1/48], got {d!r}")
        if not 0.0 < mu <= max_mu(d):
            raise ValueError(f"NormFamilyParams: mu must lie in (0, delta^3/(132(1+2 delta))] = (0, {max_mu(d):.6g}], got {mu!r}")
        if not delta_ineq_value(d) < 1.0:
            raise ValueError("NormFamilyParams: deviation inequality fails")
        if self.M < 0:
            raise ValueError("NormFamilyParams: M must be >= 0")
        if self.D < max(2, 2 * self.M + 2):
            raise ValueError(f"NormFamilyParams: D must be >= 2M+2 = {2 * self.M + 2}, got {self.D}")

    @classmethod
    def make(cls, delta: float = 1.0 / 48.0, M: int = 12, D: int | None = None, mu: float | None = None):
        return cls(float(delta), float(max_mu(delta) if mu is None else mu), int(M),
                   int(2 * M + 2 if D is None else D))

    def to_record(self) -> dict:
        return {"delta": self.delta, "mu": self.mu, "M": self.M, "D": self.D}

    @classmethod
    def from_record(cls, rec: dict) -> "NormFamilyParams":
        return cls.make(rec["delta"], rec["M"], rec.get("D"), rec.get("mu"))


def basis(D: int, k: int) -> np.ndarray:
    """e_k (1-based) in R^D."""
    v = np.zeros(D)
    v[k - 1] = 1.0
    return v


@dataclass(frozen=True, eq=False)
class SpecialVectors:
    n: int
    x1: np.ndarray
    x2: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    f1: tuple[float, float]  # coefficients of e*_{2n}, e*_{2n+1}
    f2: tuple[float, float]


def special_vectors(params: NormFamilyParams, n: int) -> SpecialVectors:
    if not 1 <= n <= params.M:
        raise IndexError(f"n must lie in [1, {params.M}], got {n}")
    d, D = params.delta, params.D
    e1, a, b = basis(D, 1), basis(D, 2 * n), basis(D, 2 * n + 1)
    x1 = a + (d / n) * b
    x2 = a - (d / n) * b
    return SpecialVectors(n, x1, x2, x1 - d * e1, x2 + d * e1,
                          (1.0, d / (2 * n)), (1.0, -d / (2 * n)))


@lru_cache(maxsize=None)
def _frame(delta: float, n: int):
    """Orthonormal frame of R^3 (coords e_1, e_2n, e_2n+1) adapted to span(z1, z2)."""
    Z = np.array([[-delta, delta], [1.0, 1.0], [delta / n, -delta / n]])
    Q, W = np.linalg.qr(Z, mode="complete")
    return Q, W[:2, :]


def _coords(n: int):
    return (0, 2 * n - 1, 2 * n)


def split(x: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    """(x_1, x_2n, x_2n+1) and the Euclidean norm of the other coordinates."""
    D = len(x)
    idx = [i for i in _coords(n) if i < D]
    u = np.zeros(3)
    for slot, i in enumerate(_coords(n)):
        if i < D:
            u[slot] = x[i]
    rest = x.copy()
    rest[idx] = 0.0
    return u, float(np.linalg.norm(rest))


def _reduced_gauge(delta: float, n: int, u: np.ndarray, rest: float):
    Q, W = _frame(delta, n)
    y = Q.T @ u
    p = math.hypot(rest, y[2])
    scale = 2.0 * math.hypot(rest, float(np.linalg.norm(u)))
    if scale == 0.0:
        return 0.0, 0.0, 0.0, True
    val, c1, c2, ok = _core.gauge2d(p, float(y[0]), float(y[1]), float(W[0, 0]), float(W[0, 1]),
                                    float(W[1, 0]), float(W[1, 1]), scale, 1e-12 * scale, GOLDEN_CAP)
    return val, c1, c2, ok


@dataclass(frozen=True)
class GaugeResult:
    value: float
    witness: tuple[float, float]
    tolerance: float


def gauge_n(params: NormFamilyParams, n: int, x) -> GaugeResult:
    """||x||_n with its minimizing coefficients (c1, c2)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (params.D,):
        raise ValueError(f"expected a vector of dimension {params.D}, got shape {x.shape}")
    if n < 1:
        raise IndexError("gauge index must be >= 1")
    u, rest = split(x, n)
    val, c1, c2, ok = _reduced_gauge(params.delta, n, u, rest)
    if not ok:
        raise GaugeToleranceError(f"gauge_{n} did not converge within {GOLDEN_CAP} golden steps")
    return GaugeResult(val, (c1, c2), GAUGE_TOL)


def norm_fine_n(params: NormFamilyParams, n: int, x) -> float:
    x = np.asarray(x, dtype=float)
    w = params.mu / (n * n)
    return (1.0 - w) * gauge_n(params, n, x).value + w * float(np.linalg.norm(x))


def union_indices(params: NormFamilyParams, x) -> list[int]:
    """Indices whose norm can differ from |x|_2: 1..M plus any n > M touching the support of x."""
    x = np.asarray(x)
    extra = [n for n in range(params.M + 1, params.D // 2 + 1)
             if x[2 * n - 1] != 0.0 or (2 * n < len(x) and x[2 * n] != 0.0)]
    return list(range(1, params.M + 1)) + extra


def norm_union(params: NormFamilyParams, x) -> tuple[float, int]:
    """min_n |x|_n and the smallest minimizing index (0 when only |x|_2 is available)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (params.D,):
        raise ValueError(f"expected a vector of dimension {params.D}, got shape {x.shape}")
    e = float(np.linalg.norm(x))
    vals = [(norm_fine_n(params, n, x), n) for n in union_indices(params, x)]
    best = min([e] + [v for v, _ in vals])
    # exact ties (e.g. every index for e_1) differ by rounding only
    tie = best + UNION_TIE_REL * e
    arg = next((n for v, n in vals if v <= tie), 0)
    return best, arg


def functional_eval(params: NormFamilyParams, i: int, n: int, x) -> float:
    """f*_{i,n}(x) = x_{2n} + (-1)^{i+1} (delta / 2n) x_{2n+1}."""
    if i not in (1, 2) or not 1 <= n <= params.M:
        raise IndexError(f"need i in {{1, 2}} and n in [1, {params.M}]")
    sign = 1.0 if i == 1 else -1.0
    return float(x[2 * n - 1] + sign * params.delta / (2 * n) * x[2 * n])


@dataclass
class VerifierReport:
    check: str
    n: int | None
    m: int | None
    bound: float
    measured: float
    passed: bool
    samples: int = 0

    def to_record(self) -> dict:
        return {"check": self.check, "n": self.n, "m": self.m, "bound": self.bound,
                "measured": self.measured, "pass": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def slice_bound(params: NormFamilyParams) -> float:
    return 33.0 * params.mu / params.delta ** 2


def check_slice_lemma(params: NormFamilyParams, n: int, i: int, sample_budget: int,
                      seed: int) -> VerifierReport:
    """Max ||x - z_{i,n}||_n over sampled x in the slice

        S = {y : |y|_n <= (n^2 + mu)/n^2,  f*_{i,n}(y) >= 1 + delta^2/(2 n^2)}.

    Adaptive random walk started at z_{i,n}, which lies in S; proposal
    scales are drawn log-uniformly so both the tip and the flanks of the
    slice get visited.
    """
    sv = special_vectors(params, n)
    z = sv.z1 if i == 1 else sv.z2
    radius = (n * n + params.mu) / (n * n)
    level = 1.0 + params.delta ** 2 / (2 * n * n)
    f_tol = 4e-16 * level
    rng = _rng.stream(seed, "slice", n, i)

    def inside(y):
        return (functional_eval(params, i, n, y) >= level - f_tol
                and norm_fine_n(params, n, y) <= radius)

    if not inside(z):
        raise SamplingStarvation("z_{i,n} itself failed the slice test")
    state, worst, accepted = z.copy(), 0.0, 1
    for _ in range(sample_budget):
        sigma = 10.0 ** rng.uniform(-9.0, -2.0)
        prop = state + sigma * rng.standard_normal(params.D)
        if inside(prop):
            accepted += 1
            state = prop
            worst = max(worst, gauge_n(params, n, prop - z).value)
        elif rng.random() < 0.05:
            state = z.copy()
    bound = slice_bound(params)
    return VerifierReport("slice", n, None, bound, worst, worst <= bound + 1e-6, accepted)


def _outside_samples(params: NormFamilyParams, n: int, count: int, rng, max_tries: int):
    """Points lambda p + (1 - lambda) b of conv(P_n ∪ B_l2) with |.|_2 > 1."""
    sv = special_vectors(params, n)
    P = np.array([sv.z1, sv.z2, -sv.z1, -sv.z2])
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise SamplingStarvation(f"only {len(out)} of {count} points outside the ball for n={n}")
        k = rng.integers(4)
        # the part outside the ball is a thin cap around each +-z, so mix and
        # perturb on log-uniform scales
        w = rng.dirichlet(np.ones(4)) * 10.0 ** rng.uniform(-6.0, -1.5)
        w[k] += 1.0 - w.sum()
        p = w @ P
        b = p / np.linalg.norm(p) + 10.0 ** rng.uniform(-5.0, -1.5) * rng.standard_normal(params.D) / math.sqrt(params.D)
        b /= np.linalg.norm(b)
        lam = rng.uniform()
        x = lam * p + (1.0 - lam) * b
        if np.linalg.norm(x) > 1.0:
            out.append(x)
    return np.array(out)


def check_separation(params: NormFamilyParams, n: int, m: int, sample_budget: int,
                     seed: int) -> VerifierReport:
    """min |x - y|_2 over sampled x in B~_n minus the ball and y in B~_m minus the ball."""
    if n == m:
        raise ValueError("separation needs n != m")
    rng = _rng.stream(seed, "separation", n, m)
    X = _outside_samples(params, n, sample_budget, rng, 200 * sample_budget)
    Y = _outside_samples(params, m, sample_budget, rng, 200 * sample_budget)
    sq = (X * X).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * X @ Y.T
    measured = float(np.sqrt(max(sq.min(), 0.0)))
    bound = 1.0 - 10.0 * params.delta
    return VerifierReport("closed", n, m, bound, measured, measured >= bound - 1e-9, 2 * sample_budget)


def separation_all(params: NormFamilyParams, sample_budget: int, seed: int) -> VerifierReport:
    """min |x - y|_2 over sampled x in B~_n, y in B~_m outside the ball, over all n < m <= M."""
    if params.M < 2:
        raise ValueError("separation needs M >= 2")
    S = [_outside_samples(params, n, sample_budget, _rng.stream(seed, "separation_all", n),
                          200 * sample_budget) for n in range(1, params.M + 1)]
    best, arg = math.inf, (None, None)
    for a in range(len(S)):
        for b in range(a + 1, len(S)):
            X, Y = S[a], S[b]
            sq = (X * X).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * X @ Y.T
            d = float(np.sqrt(max(sq.min(), 0.0)))
            if d < best:
                best, arg = d, (a + 1, b + 1)
    bound = 1.0 - 10.0 * params.delta
    return VerifierReport("closed", arg[0], arg[1], bound, best, best >= bound - 1e-9,
                          sample_budget * params.M)


def claim_sup_analytic(params: NormFamilyParams, n: int) -> float:
    """sup of f*_{i,n} over conv((P_n without z_{i,n}) ∪ B_l2): the ball term dominates."""
    return math.sqrt(1.0 + (params.delta / (2 * n)) ** 2)


def check_claim(params: NormFamilyParams, n: int, i: int, sample_budget: int,
                seed: int) -> VerifierReport:
    """Sampled and analytic sup of f*_{i,n} on conv((P_n minus z_{i,n}) ∪ B) vs 1 + delta^2/(4n^2)."""
    sv = special_vectors(params, n)
    zi, zj = (sv.z1, sv.z2) if i == 1 else (sv.z2, sv.z1)
    others = np.array([zj, -zi, -zj])
    grad = np.zeros(params.D)
    grad[2 * n - 1] = 1.0
    grad[2 * n] = (1.0 if i == 1 else -1.0) * params.delta / (2 * n)
    rng = _rng.stream(seed, "claim", n, i)
    B = rng.standard_normal((sample_budget, params.D))
    B[: sample_budget // 2] += 50.0 * grad  # lean toward the maximizing direction
    B /= np.linalg.norm(B, axis=1, keepdims=True)
    B[0] = grad / np.linalg.norm(grad)
    W = rng.dirichlet(np.ones(4), size=sample_budget)
    pts = W[:, :3] @ others + W[:, 3:] * B
    vals = pts @ grad
    sampled = float(max(vals.max(), (others @ grad).max(), grad @ B[0]))
    analytic = claim_sup_analytic(params, n)
    bound = 1.0 + params.delta ** 2 / (4 * n * n)
    measured = max(sampled, analytic)
    return VerifierReport("claim", n, None, bound, measured, measured < bound, sample_budget)
