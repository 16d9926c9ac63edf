"""Named property checks shared by the ``verify`` subcommand and the acceptance suite.

Every check takes a seed and explicit budgets and returns a ``CheckResult``
with the bound it is held to and the worst value measured. Oracle checks
come first in ``CHECKS`` so the main modules are certified against them
before their own properties are tested.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from holonet import _rng
from holonet.flat_sets import (BOX, CROSS, FlatnessProfile, FlatSetDescriptor, estimate_height,
                               project_many, project_onto, r_value, sample_points)
from holonet.gauge import (NormFamilyParams, check_claim, check_slice_lemma, delta_ineq_value,
                           gauge_n, norm_fine_n, norm_union, separation_all, slice_bound,
                           special_vectors)
from holonet.nearest_point import (SegmentK, divergence_experiment, divergence_verdict,
                                   euclidean_contrast, goal_bound, output_gap_bound)
from holonet.nets import build_net, verify_net
from holonet.oracles import (HullProblem, delta_ineq_check, gauge_grid, geo2_check, grid_distance,
                             min_norm_point)
from holonet.retraction import (DISPLACEMENT_CONSTANT, retract, sample_at_distance,
                                stratified_distances)
from holonet.whitney import partition_at, psi


@dataclass
class CheckResult:
    check_name: str
    bound: float
    measured: float
    passed: bool
    seed: int
    detail: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = {"check_name": self.check_name, "bound": float(self.bound), "measured": float(self.measured),
               "pass": bool(self.passed), "seed": self.seed}
        if self.detail:
            rec["detail"] = self.detail
        return rec


def standard_sets(alpha: float = 0.5, D: int = 6):
    return [FlatSetDescriptor.box(alpha, D), FlatSetDescriptor.cross(alpha, D)]


def default_params() -> NormFamilyParams:
    return NormFamilyParams.make(1.0 / 48.0, 12, 26)


# oracle equivalence

def random_small_set(rng) -> FlatSetDescriptor:
    dim = int(rng.integers(1, 4))
    shape = BOX if rng.random() < 0.5 else CROSS
    coeffs = tuple(float(c) for c in rng.uniform(0.2, 1.5, dim))
    return FlatSetDescriptor(shape, FlatnessProfile.holder(0.5), dim, coeffs)


def _membership(K):
    c = np.asarray(K.coeffs)
    if K.shape == BOX:
        return lambda G: np.all(np.abs(G) <= c, axis=1)
    return lambda G: np.sum(np.abs(G) / c, axis=1) <= 1.0


def check_projection_oracles(seed: int, instances: int = 100) -> CheckResult:
    """project_onto vs Wolfe min-norm point vs zoomed grid scan on random sets in dims <= 3."""
    rng = _rng.stream(seed, "oracle_projection")
    worst = 0.0
    for _ in range(instances):
        K = random_small_set(rng)
        q = rng.uniform(-2.0, 2.0, K.ambient_dim)
        _, d_proj = project_onto(K, q)
        d_wolfe, _ = min_norm_point(HullProblem(K.vertices(), q))
        c = np.asarray(K.coeffs)
        step = 0.05 if K.ambient_dim == 3 else 0.01
        d_grid = grid_distance(_membership(K), q, (-c, c), step, refine_to=1e-5)
        worst = max(worst, abs(d_proj - d_wolfe), abs(d_proj - d_grid), abs(d_wolfe - d_grid))
    return CheckResult("oracle_projection", 1e-4, worst, worst <= 1e-4, seed, {"instances": instances})


def check_gauge_grid(seed: int, instances: int = 20, params: NormFamilyParams | None = None) -> CheckResult:
    """gauge_n against a brute-force grid over (c1, c2) for x in span{e_1, e_2n, e_2n+1}, D = 6."""
    base = params or default_params()
    params = NormFamilyParams.make(base.delta, 2, 6, base.mu)
    rng = _rng.stream(seed, "oracle_gauge")
    worst = 0.0
    for k in range(instances):
        n = 1 + k % 2
        x = np.zeros(params.D)
        x[[0, 2 * n - 1, 2 * n]] = rng.standard_normal(3) * 10.0 ** rng.uniform(-1, 1)
        sv = special_vectors(params, n)
        g = gauge_n(params, n, x).value
        scale = float(np.linalg.norm(x))
        # the objective is positively homogeneous, so the grid scales with |x|
        ref = gauge_grid(sv.z1, sv.z2, x, 2.0 * scale, 0.01 * scale, 1e-9 * scale)
        worst = max(worst, abs(g - ref))
    return CheckResult("oracle_gauge_grid", 1e-6, worst, worst <= 1e-6, seed, {"instances": instances})


def check_geo2(seed: int, configs: int = 100, samples: int = 20) -> CheckResult:
    """Max over random P (norms in [1, 1.2], dims 2..6) of the sampled lhs minus sqrt(max|p|^2 - 1)."""
    rng = _rng.stream(seed, "geo2_configs")
    worst = -math.inf
    for k in range(configs):
        dim = int(rng.integers(2, 7))
        P = rng.standard_normal((int(rng.integers(1, 5)), dim))
        P *= (rng.uniform(1.0, 1.2, len(P)) / np.linalg.norm(P, axis=1))[:, None]
        res = geo2_check(P, samples, seed + k)
        worst = max(worst, res.max_lhs - res.rhs)
    return CheckResult("geo2", 1e-9, worst, worst <= 1e-9, seed, {"configs": configs})


# norm family

def check_delta_ineq(params: NormFamilyParams, seed: int) -> CheckResult:
    v = delta_ineq_check(params.delta)
    agree = abs(v - delta_ineq_value(params.delta)) <= 1e-15
    return CheckResult("delta_ineq", 1.0, v, v < 1.0 and agree, seed)


def _norm_samples(params, count, rng):
    X = rng.standard_normal((count, params.D))
    third = count // 3
    # near the special vectors, where the norms differ most from l2
    for k in range(third):
        n = 1 + k % params.M
        sv = special_vectors(params, n)
        X[k] = (sv.z1, sv.z2, sv.x1, sv.x2)[k % 4] + 10.0 ** rng.uniform(-6, -1) * X[k]
    # supported on e_1, e_2n, e_2n+1 only
    for k in range(third, 2 * third):
        n = 1 + k % params.M
        v = np.zeros(params.D)
        v[[0, 2 * n - 1, 2 * n]] = X[k, :3]
        X[k] = v
    return X


def check_baseequiv(params: NormFamilyParams, seed: int, samples: int = 1000) -> CheckResult:
    """|x|/(1+2d) <= ||x||_n <= |x|_n <= |x|; measured is the worst relative violation."""
    rng = _rng.stream(seed, "baseequiv")
    worst = -math.inf
    for x in _norm_samples(params, samples, rng):
        e = float(np.linalg.norm(x))
        for n in range(1, params.M + 1):
            g = gauge_n(params, n, x).value
            f = norm_fine_n(params, n, x)
            worst = max(worst, (e / (1 + 2 * params.delta) - g) / e, (g - f) / e, (f - e) / e)
    return CheckResult("baseequiv", 1e-12, worst, worst <= 1e-12, seed, {"samples": samples})


def check_rotundity(params: NormFamilyParams, seed: int, pairs: int = 1000) -> CheckResult:
    """max norm_union((u+v)/2) over pairs of distinct unit vectors of the union norm."""
    rng = _rng.stream(seed, "rotundity")
    X = _norm_samples(params, pairs, rng)
    worst = -math.inf
    for x in X:
        y = x + 10.0 ** rng.uniform(-3, 0.5) * float(np.linalg.norm(x)) * rng.standard_normal(params.D)
        u = x / norm_union(params, x)[0]
        v = y / norm_union(params, y)[0]
        if np.allclose(u, v, rtol=0, atol=1e-12):
            continue
        worst = max(worst, norm_union(params, 0.5 * (u + v))[0])
    return CheckResult("rotundity", 1.0, worst, worst < 1.0, seed, {"pairs": pairs})


def check_closed(params: NormFamilyParams, seed: int, samples: int = 1000) -> CheckResult:
    rep = separation_all(params, samples, seed)
    return CheckResult("closed", rep.bound, rep.measured, rep.passed, seed, {"n": rep.n, "m": rep.m})


def check_slice(params: NormFamilyParams, seed: int, samples: int = 300) -> CheckResult:
    worst, arg = 0.0, None
    for n in range(1, params.M + 1):
        for i in (1, 2):
            rep = check_slice_lemma(params, n, i, samples, seed)
            if rep.measured >= worst:
                worst, arg = rep.measured, (n, i)
    bound = slice_bound(params)
    return CheckResult("slice", bound, worst, worst <= bound + 1e-6, seed, {"n_i": arg})


def check_claim_all(params: NormFamilyParams, seed: int, samples: int = 1000) -> CheckResult:
    """Worst ratio sup f*_{i,n} / (1 + d^2/(4n^2)) over n, i; must stay below 1."""
    worst, arg = -math.inf, None
    for n in range(1, params.M + 1):
        for i in (1, 2):
            rep = check_claim(params, n, i, samples, seed)
            r = rep.measured / rep.bound
            if r > worst:
                worst, arg = r, (n, i)
    return CheckResult("claim", 1.0, worst, worst < 1.0, seed, {"n_i": arg})


# flat sets, nets, partition, retraction

def check_heights(seed: int, budget: int = 10000, alpha: float = 0.5, D: int = 6) -> CheckResult:
    """max over n <= D of h_n - r_n on K1 and K2."""
    worst = -math.inf
    for K in standard_sets(alpha, D):
        for n in range(D + 1):
            h = estimate_height(K, n, budget, seed)
            worst = max(worst, h.lower_bound - r_value(K.profile, n))
    return CheckResult("heights", 0.0, worst, worst <= 0.0, seed, {"budget": budget})


def check_nets(seed: int, levels: int = 10, samples: int = 2000) -> CheckResult:
    bad = []
    for K in standard_sets():
        for k in range(levels + 1):
            a_ok, b_ok = verify_net(build_net(K, k), samples, seed)
            if not (a_ok and b_ok):
                bad.append((K.shape, k, a_ok, b_ok))
    return CheckResult("nets", 0.0, float(len(bad)), not bad, seed, {"failures": bad})


def off_set_samples(K, count, rng, lo=1e-4, hi=1.0):
    d = stratified_distances(count, rng, lo, hi)
    return sample_at_distance(K, d, rng), d


def check_retraction(seed: int, samples: int = 10000, alpha: float = 0.5, D: int = 6) -> list[CheckResult]:
    """R = id on K; |R(x) - x| <= 9 d(x, K) + 1e-9 off K.

    The displacement check reports the worst ratio |R(x) - x| / d(x, K).
    """
    worst_id, worst_ratio, slack = 0.0, 0.0, -math.inf
    for K in standard_sets(alpha, D):
        rng = _rng.stream(seed, "retraction", K.shape)
        for x in sample_points(K, samples, rng):
            worst_id = max(worst_id, float(np.max(np.abs(retract(K, x) - x))))
        X, d = off_set_samples(K, samples, rng)
        for x, dx in zip(X, d):
            disp = float(np.linalg.norm(retract(K, x) - x))
            worst_ratio = max(worst_ratio, disp / dx)
            slack = max(slack, disp - DISPLACEMENT_CONSTANT * dx)
    return [
        CheckResult("retraction_identity", 0.0, worst_id, worst_id == 0.0, seed),
        CheckResult("retraction_displacement", DISPLACEMENT_CONSTANT, worst_ratio, slack <= 1e-9, seed),
    ]


def check_partition(seed: int, samples: int = 2000, alpha: float = 0.5, D: int = 6) -> list[CheckResult]:
    """Sum phi = 1, phi >= 0, sum psi >= d/4, support radius <= 7 d.

    Mass and support are reported as ratios to d(x, K).
    """
    sum_err, min_phi = 0.0, math.inf
    mass, mass_slack, support, support_slack = math.inf, math.inf, 0.0, -math.inf
    for K in standard_sets(alpha, D):
        rng = _rng.stream(seed, "partition", K.shape)
        X, d = off_set_samples(K, samples, rng)
        for x, dx in zip(X, d):
            ev = partition_at(K, x, dx)
            sum_err = max(sum_err, abs(math.fsum(e.phi for e in ev.entries) - 1.0))
            min_phi = min(min_phi, min(e.phi for e in ev.entries))
            s = ev.psi_sum
            mass, mass_slack = min(mass, s / dx), min(mass_slack, s - dx / 4.0)
            rad = max(float(np.linalg.norm(x - e.cell.center)) for e in ev.entries)
            support, support_slack = max(support, rad / dx), max(support_slack, rad - 7.0 * dx)
    return [
        CheckResult("partition_unity", 1e-12, sum_err, sum_err <= 1e-12, seed),
        CheckResult("partition_nonnegative", 0.0, min_phi, min_phi >= 0.0, seed),
        CheckResult("partition_mass", 0.25, mass, mass_slack >= -1e-12, seed),
        CheckResult("partition_support", 7.0, support, support_slack <= 1e-9, seed),
    ]


def check_psi_lipschitz(seed: int, pairs: int = 2000, alpha: float = 0.5, D: int = 6) -> CheckResult:
    """max over pairs and cells of |psi(x) - psi(y)| / |x - y|; passes if every excess is <= 1e-9."""
    worst, slack = 0.0, -math.inf
    for K in standard_sets(alpha, D):
        rng = _rng.stream(seed, "psi_lipschitz", K.shape)
        X, _ = off_set_samples(K, pairs, rng)
        U = rng.standard_normal(X.shape)
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        t = 10.0 ** rng.uniform(-6, -1, len(X))
        Y = X + t[:, None] * U
        _, dX = project_many(K, X)
        _, dY = project_many(K, Y)
        for x, y, dx, dy in zip(X, Y, dX, dY):
            if dy <= 1e-12:
                continue
            cells = {(e.cell.level, e.cell.index): e.cell for e in partition_at(K, x, dx).entries}
            cells.update({(e.cell.level, e.cell.index): e.cell for e in partition_at(K, y, dy).entries})
            gap = float(np.linalg.norm(x - y))
            for c in cells.values():
                change = abs(psi(c, x, dx) - psi(c, y, dy))
                worst, slack = max(worst, change / gap), max(slack, change - gap)
    return CheckResult("psi_lipschitz", 1.0, worst, slack <= 1e-9, seed, {"pairs": pairs})


# nearest point map

def check_npm(params: NormFamilyParams, seed: int, eps: float = 1.0) -> list[CheckResult]:
    K = SegmentK(eps * params.delta)
    n_range = range(2, params.M + 1)
    rows = divergence_experiment(params, K, eps, n_range)
    verdict = divergence_verdict(params, eps, rows)
    contrast = euclidean_contrast(params, K, eps, n_range)
    nonexp = max(out - inp for _, inp, out in contrast)
    return [
        CheckResult("npm_divergence", output_gap_bound(params, eps), verdict["min_output_gap"],
                    verdict["pass"], seed,
                    {"input_gaps_bounded": verdict["input_gaps_bounded"],
                     "input_gaps_decreasing": verdict["input_gaps_decreasing"]}),
        CheckResult("npm_goalclaim", goal_bound(params, eps), verdict["max_goal_distance"],
                    verdict["max_goal_distance"] <= goal_bound(params, eps) + 1e-6, seed),
        CheckResult("npm_euclidean_contrast", 0.0, nonexp, nonexp <= 0.0, seed),
    ]


def _as_list(r):
    return r if isinstance(r, list) else [r]


CHECKS = {
    "oracle_projection": lambda p, s: check_projection_oracles(s),
    "oracle_gauge_grid": lambda p, s: check_gauge_grid(s, params=p),
    "geo2": lambda p, s: check_geo2(s),
    "delta_ineq": lambda p, s: check_delta_ineq(p, s),
    "baseequiv": lambda p, s: check_baseequiv(p, s, 200),
    "rotundity": lambda p, s: check_rotundity(p, s, 200),
    "closed": lambda p, s: check_closed(p, s, 300),
    "slice": lambda p, s: check_slice(p, s, 200),
    "claim": lambda p, s: check_claim_all(p, s),
    "heights": lambda p, s: check_heights(s, 2000),
    "nets": lambda p, s: check_nets(s, 8, 500),
    "partition": lambda p, s: check_partition(s, 500),
    "psi_lipschitz": lambda p, s: check_psi_lipschitz(s, 300),
    "retraction": lambda p, s: check_retraction(s, 1000),
    "npm": lambda p, s: check_npm(p, s),
}


def run_checks(params: NormFamilyParams, seed: int, only=None) -> list[CheckResult]:
    names = list(CHECKS) if not only else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}; choose from {', '.join(CHECKS)}")
    out = []
    for name in names:
        out.extend(_as_list(CHECKS[name](params, seed)))
    return out
