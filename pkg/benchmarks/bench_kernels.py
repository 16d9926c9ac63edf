"""Compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Times the greedy net builder on a few sections of the standard sets and a
batch of two-variable gauge solves, checks that both backends agree, and
prints one row per case with the speedup.
"""
import argparse
import time

import numpy as np

from holonet import _fallback
from holonet.flat_sets import FlatSetDescriptor, section
from holonet.gauge import NormFamilyParams, _frame, split, special_vectors
from holonet.nets import grid_counts, section_dim

try:
    from holonet import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def net_cases():
    for K in (FlatSetDescriptor.box(0.5, 6), FlatSetDescriptor.cross(0.5, 6)):
        for k in (4, 8, 10):
            m = section_dim(K, k)
            sec = section(K, m)
            eps = 2.0 ** -k
            coeffs = np.zeros(m)
            coeffs[: len(sec.coeffs)] = sec.coeffs
            yield f"greedy_net {K.shape} k={k} m={m}", (coeffs, grid_counts(coeffs, eps), eps, K.shape == "cross")


def gauge_batch(count=2000, seed=0):
    params = NormFamilyParams.make(1 / 48, 4)
    rng = np.random.default_rng(seed)
    calls = []
    for x in rng.normal(size=(count, params.D)):
        n = int(rng.integers(1, params.M + 1))
        if rng.random() < 0.5:
            x = special_vectors(params, n).z1 + 1e-3 * x
        u, rest = split(x, n)
        Q, W = _frame(params.delta, n)
        y = Q.T @ u
        scale = 2.0 * float(np.hypot(rest, np.linalg.norm(u)))
        calls.append((float(np.hypot(rest, y[2])), float(y[0]), float(y[1]), float(W[0, 0]), float(W[0, 1]),
                      float(W[1, 0]), float(W[1, 1]), scale, 1e-12 * scale, 200))
    return calls


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'case':34s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}")
    for name, call in net_cases():
        tc, a = best_of(lambda: _kernels.greedy_net(*call), args.repeat)
        tp, b = best_of(lambda: _fallback.greedy_net(*call), 1 if len(a) > 2000 else args.repeat)
        assert np.array_equal(a, b), name
        print(f"{name:34s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}x   ({len(a)} points)")

    calls = gauge_batch()
    tc, a = best_of(lambda: [_kernels.gauge2d(*c) for c in calls], args.repeat)
    tp, b = best_of(lambda: [_fallback.gauge2d(*c) for c in calls], args.repeat)
    worst = max(abs(x[0] - y[0]) for x, y in zip(a, b))
    print(f"{'gauge2d x' + str(len(calls)):34s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}x   (max diff {worst:.1e})")


if __name__ == "__main__":
    main()
