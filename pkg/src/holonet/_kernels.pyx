# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: greedy grid nets and the two-variable gauge program.

Both functions mirror ``holonet._fallback`` exactly (same candidate order,
same comparisons), so either backend yields bit-identical nets.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs, hypot

cnp.import_array()

ctypedef cnp.int64_t i64

cdef double INV_PHI = 0.6180339887498949
cdef double MEMBER_TOL = 1e-12


def greedy_net(const double[::1] coeffs, const i64[::1] counts, double eps, bint cross):
    """Lexicographic greedy eps-separated subset of a symmetric grid.

    Coordinate ``k`` takes the values ``coeffs[k] * (i / counts[k])`` for
    ``i = -counts[k] .. counts[k]``. For ``cross`` the candidates are
    restricted to the weighted l1 ball.
    """
    cdef Py_ssize_t m = coeffs.shape[0]
    if m == 0:
        return np.zeros((1, 0))
    cdef Py_ssize_t k
    cdef i64[::1] nb = np.empty(m, dtype=np.int64)
    cdef i64[::1] stride = np.empty(m, dtype=np.int64)
    cdef double total_f = 1.0
    for k in range(m):
        nb[k] = <i64>floor(2.0 * coeffs[k] / eps) + 1
        total_f *= nb[k]
    if total_f > 2.0 ** 31:
        raise MemoryError("bucket grid too large for this net level")
    stride[m - 1] = 1
    for k in range(m - 2, -1, -1):
        stride[k] = stride[k + 1] * nb[k + 1]
    cdef i64 total = stride[0] * nb[0]

    cdef i64[::1] head = np.full(total, -1, dtype=np.int64)
    cdef Py_ssize_t cap = 1024
    pts_arr = np.empty((cap, m))
    nxt_arr = np.empty(cap, dtype=np.int64)
    cdef double[:, ::1] pts = pts_arr
    cdef i64[::1] nxt = nxt_arr
    cdef Py_ssize_t count = 0

    cdef i64[::1] idx = np.empty(m, dtype=np.int64)
    cdef i64[::1] bkt = np.empty(m, dtype=np.int64)
    cdef i64[::1] off = np.empty(m, dtype=np.int64)
    cdef double[::1] x = np.empty(m)
    for k in range(m):
        idx[k] = -counts[k]

    cdef double eps2 = eps * eps
    cdef double s, d2, diff
    cdef bint ok, valid
    cdef i64 bid, bk, j

    while True:
        ok = True
        if cross:
            s = 0.0
            for k in range(m):
                if counts[k] > 0:
                    s += fabs(<double>idx[k]) / <double>counts[k]
            if s > 1.0 + MEMBER_TOL:
                ok = False
        if ok:
            for k in range(m):
                if counts[k] > 0:
                    x[k] = coeffs[k] * (<double>idx[k] / <double>counts[k])
                else:
                    x[k] = 0.0
                bk = <i64>floor((x[k] + coeffs[k]) / eps)
                if bk < 0:
                    bk = 0
                elif bk >= nb[k]:
                    bk = nb[k] - 1
                bkt[k] = bk
                off[k] = -1
            while ok:
                valid = True
                bid = 0
                for k in range(m):
                    bk = bkt[k] + off[k]
                    if bk < 0 or bk >= nb[k]:
                        valid = False
                        break
                    bid += bk * stride[k]
                if valid:
                    j = head[bid]
                    while j >= 0:
                        d2 = 0.0
                        for k in range(m):
                            diff = pts[j, k] - x[k]
                            d2 += diff * diff
                        if d2 < eps2:
                            ok = False
                            break
                        j = nxt[j]
                if not ok:
                    break
                k = m - 1
                while k >= 0:
                    off[k] += 1
                    if off[k] <= 1:
                        break
                    off[k] = -1
                    k -= 1
                if k < 0:
                    break
            if ok:
                if count == cap:
                    cap *= 2
                    pts_arr = np.resize(pts_arr, (cap, m))
                    nxt_arr = np.resize(nxt_arr, cap)
                    pts = pts_arr
                    nxt = nxt_arr
                bid = 0
                for k in range(m):
                    pts[count, k] = x[k]
                    bid += bkt[k] * stride[k]
                nxt[count] = head[bid]
                head[bid] = count
                count += 1
        k = m - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] <= counts[k]:
                break
            idx[k] = -counts[k]
            k -= 1
        if k < 0:
            break
    return np.array(pts_arr[:count])


cdef inline double _objective(double p, double y1, double y2, double w11, double w12,
                              double w21, double w22, double c1, double c2) nogil:
    cdef double r1 = y1 - w11 * c1 - w12 * c2
    cdef double r2 = y2 - w21 * c1 - w22 * c2
    return hypot(p, hypot(r1, r2)) + fabs(c1) + fabs(c2)


cdef double _inner(double p, double y1, double y2, double w11, double w12, double w21,
                   double w22, double c1, double lo, double hi, double tol, int cap,
                   double* arg, int* conv) nogil:
    cdef double a = lo, b = hi
    cdef double c = b - INV_PHI * (b - a)
    cdef double d = a + INV_PHI * (b - a)
    cdef double fc = _objective(p, y1, y2, w11, w12, w21, w22, c1, c)
    cdef double fd = _objective(p, y1, y2, w11, w12, w21, w22, c1, d)
    cdef int it = 0
    while b - a > tol and it < cap:
        if fc <= fd:
            b = d
            d = c
            fd = fc
            c = b - INV_PHI * (b - a)
            fc = _objective(p, y1, y2, w11, w12, w21, w22, c1, c)
        else:
            a = c
            c = d
            fc = fd
            d = a + INV_PHI * (b - a)
            fd = _objective(p, y1, y2, w11, w12, w21, w22, c1, d)
        it += 1
    if b - a > tol:
        conv[0] = 0
    arg[0] = 0.5 * (a + b)
    return _objective(p, y1, y2, w11, w12, w21, w22, c1, arg[0])


def gauge2d(double p, double y1, double y2, double w11, double w12, double w21, double w22,
            double bound, double tol, int cap):
    """min over |c1|,|c2| <= bound of hypot(p, |y - W c|) + |c1| + |c2|.

    Nested golden-section search (the partial minimum over c2 is convex in
    c1). Returns ``(value, c1, c2, converged)``.
    """
    cdef double a = -bound, b = bound
    cdef double c, d, fc, fd, c2c, c2d, c2x, val, zero
    cdef int it = 0
    cdef int conv = 1
    with nogil:
        c = b - INV_PHI * (b - a)
        d = a + INV_PHI * (b - a)
        fc = _inner(p, y1, y2, w11, w12, w21, w22, c, -bound, bound, tol, cap, &c2c, &conv)
        fd = _inner(p, y1, y2, w11, w12, w21, w22, d, -bound, bound, tol, cap, &c2d, &conv)
        while b - a > tol and it < cap:
            if fc <= fd:
                b = d
                d = c
                fd = fc
                c = b - INV_PHI * (b - a)
                fc = _inner(p, y1, y2, w11, w12, w21, w22, c, -bound, bound, tol, cap, &c2c, &conv)
            else:
                a = c
                c = d
                fc = fd
                d = a + INV_PHI * (b - a)
                fd = _inner(p, y1, y2, w11, w12, w21, w22, d, -bound, bound, tol, cap, &c2d, &conv)
            it += 1
        if b - a > tol:
            conv = 0
        c = 0.5 * (a + b)
        val = _inner(p, y1, y2, w11, w12, w21, w22, c, -bound, bound, tol, cap, &c2x, &conv)
        zero = _objective(p, y1, y2, w11, w12, w21, w22, 0.0, 0.0)
    if zero <= val:
        return zero, 0.0, 0.0, bool(conv)
    return val, c, c2x, bool(conv)
