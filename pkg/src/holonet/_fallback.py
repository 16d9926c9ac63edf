"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same candidate order and the same floating-point comparisons, so nets come
out bit-identical to the compiled path. Slow on fine levels.
"""
import itertools
import math

import numpy as np

INV_PHI = 0.6180339887498949
MEMBER_TOL = 1e-12


def greedy_net(coeffs, counts, eps, cross):
    coeffs = [float(c) for c in coeffs]
    counts = [int(n) for n in counts]
    m = len(coeffs)
    if m == 0:
        return np.zeros((1, 0))
    nb = [int(math.floor(2.0 * c / eps)) + 1 for c in coeffs]
    eps2 = eps * eps
    buckets = {}
    kept = []
    offsets = list(itertools.product((-1, 0, 1), repeat=m))
    ranges = [range(-n, n + 1) for n in counts]
    for idx in itertools.product(*ranges):
        if cross:
            s = 0.0
            for i, n in zip(idx, counts):
                if n > 0:
                    s += abs(float(i)) / float(n)
            if s > 1.0 + MEMBER_TOL:
                continue
        x = [c * (float(i) / float(n)) if n > 0 else 0.0 for c, i, n in zip(coeffs, idx, counts)]
        bkt = tuple(min(max(int(math.floor((xk + c) / eps)), 0), nbk - 1)
                    for xk, c, nbk in zip(x, coeffs, nb))
        ok = True
        for off in offsets:
            key = tuple(b + o for b, o in zip(bkt, off))
            for j in buckets.get(key, ()):
                p = kept[j]
                d2 = 0.0
                for pk, xk in zip(p, x):
                    diff = pk - xk
                    d2 += diff * diff
                if d2 < eps2:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            buckets.setdefault(bkt, []).append(len(kept))
            kept.append(x)
    return np.array(kept, dtype=float).reshape(len(kept), m)


def _objective(p, y1, y2, w11, w12, w21, w22, c1, c2):
    r1 = y1 - w11 * c1 - w12 * c2
    r2 = y2 - w21 * c1 - w22 * c2
    return math.hypot(p, math.hypot(r1, r2)) + abs(c1) + abs(c2)


def _golden(f, lo, hi, tol, cap):
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < cap:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    return 0.5 * (a + b), b - a <= tol


def gauge2d(p, y1, y2, w11, w12, w21, w22, bound, tol, cap):
    conv = [True]

    def inner(c1):
        c2, ok = _golden(lambda c2: _objective(p, y1, y2, w11, w12, w21, w22, c1, c2),
                         -bound, bound, tol, cap)
        conv[0] = conv[0] and ok
        return _objective(p, y1, y2, w11, w12, w21, w22, c1, c2), c2

    c1, ok = _golden(lambda c: inner(c)[0], -bound, bound, tol, cap)
    val, c2 = inner(c1)
    zero = _objective(p, y1, y2, w11, w12, w21, w22, 0.0, 0.0)
    if zero <= val:
        return zero, 0.0, 0.0, conv[0] and ok
    return val, c1, c2, conv[0] and ok
