# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Semantics match ``_kernels_py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, expm1, lgamma, fabs
from libc.stdint cimport uint64_t

cnp.import_array()

cdef enum:
    MAXD = 3
    MAXPTS = 256

cdef double TOL = 1e-12


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef bint _solve(double* G, double* rhs, int m, double* out) noexcept nogil:
    # Gaussian elimination with partial pivoting on an m x m system, m <= 3
    cdef double a[3][4]
    cdef int i, j, k, piv
    cdef double t, best
    for i in range(m):
        for j in range(m):
            a[i][j] = G[i * 3 + j]
        a[i][m] = rhs[i]
    for k in range(m):
        piv = k
        best = fabs(a[k][k])
        for i in range(k + 1, m):
            if fabs(a[i][k]) > best:
                best = fabs(a[i][k])
                piv = i
        if best < 1e-300:
            return False
        if piv != k:
            for j in range(m + 1):
                t = a[k][j]
                a[k][j] = a[piv][j]
                a[piv][j] = t
        for i in range(k + 1, m):
            t = a[i][k] / a[k][k]
            for j in range(k, m + 1):
                a[i][j] -= t * a[k][j]
    for i in range(m - 1, -1, -1):
        t = a[i][m]
        for j in range(i + 1, m):
            t -= a[i][j] * out[j]
        out[i] = t / a[i][i]
    return True


cdef double _circum(double[:, ::1] pts, int* sup, int ns, int d, double* center, int* degenerate) noexcept nogil:
    cdef int i, j, k
    cdef double A[3][3]
    cdef double G[9]
    cdef double rhs[3]
    cdef double lam[3]
    cdef double r2 = 0.0, s
    if ns == 1:
        for k in range(d):
            center[k] = pts[sup[0], k]
        return 0.0
    for i in range(ns - 1):
        for k in range(d):
            A[i][k] = pts[sup[i + 1], k] - pts[sup[0], k]
    for i in range(ns - 1):
        rhs[i] = 0.0
        for k in range(d):
            rhs[i] += 0.5 * A[i][k] * A[i][k]
        for j in range(ns - 1):
            s = 0.0
            for k in range(d):
                s += A[i][k] * A[j][k]
            G[i * 3 + j] = s
    if not _solve(G, rhs, ns - 1, lam):
        # affinely dependent support; caller redoes the whole set in Python
        degenerate[0] = 1
        return 0.0
    for k in range(d):
        s = 0.0
        for i in range(ns - 1):
            s += lam[i] * A[i][k]
        center[k] = pts[sup[0], k] + s
        r2 += s * s
    return sqrt(r2)


cdef double _mtf(double[:, ::1] pts, int* order, int end, int* sup, int ns, int d, double* center, int* degenerate) noexcept nogil:
    cdef double radius
    cdef int i, j, p, tmp
    cdef double dist2, s
    if ns > 0:
        radius = _circum(pts, sup, ns, d, center, degenerate)
    else:
        radius = -1.0
    if ns == d + 1:
        return radius
    i = 0
    while i < end:
        p = order[i]
        if radius < 0:
            dist2 = 1e300
        else:
            dist2 = 0.0
            for j in range(d):
                s = pts[p, j] - center[j]
                dist2 += s * s
        if radius < 0 or sqrt(dist2) > radius * (1 + TOL) + TOL:
            sup[ns] = p
            radius = _mtf(pts, order, i, sup, ns + 1, d, center, degenerate)
            # move to front
            tmp = order[i]
            for j in range(i, 0, -1):
                order[j] = order[j - 1]
            order[0] = tmp
        i += 1
    return radius


def miniball_radius(P):
    cdef double[:, ::1] pts = np.ascontiguousarray(P, dtype=np.float64)
    cdef int n = pts.shape[0]
    cdef int d = pts.shape[1]
    cdef int i
    cdef int order[MAXPTS]
    cdef int sup[MAXD + 1]
    cdef double center[MAXD]
    if n == 0:
        raise ValueError("miniball needs a nonempty (k, d) array")
    if d > MAXD or n > MAXPTS:
        from nervegraph._kernels_py import miniball_radius as _py
        return _py(P)
    cdef int degenerate = 0
    cdef double radius
    for i in range(n):
        order[i] = i
    radius = _mtf(pts, order, n, sup, 0, d, center, &degenerate)
    if degenerate:
        from nervegraph._kernels_py import miniball_radius as _py
        return _py(P)
    return radius


def decomposable_edges(int n, us, vs):
    cdef long[::1] u_arr = np.ascontiguousarray(us, dtype=np.int64)
    cdef long[::1] v_arr = np.ascontiguousarray(vs, dtype=np.int64)
    cdef Py_ssize_t m = u_arr.shape[0]
    cdef Py_ssize_t k
    cdef int u, v, b
    cdef uint64_t adj[64]
    cdef uint64_t allowed, visited, frontier, nxt, f, full
    cdef bint reached
    if n > 64:
        from nervegraph._kernels_py import decomposable_edges as _py
        return _py(n, us, vs)
    out = np.zeros(m, dtype=bool)
    cdef cnp.npy_bool[::1] acc = out
    for b in range(n):
        adj[b] = 0
    full = (<uint64_t>0xFFFFFFFFFFFFFFFF) if n == 64 else ((<uint64_t>1 << n) - 1)
    for k in range(m):
        u = u_arr[k]
        v = v_arr[k]
        if (adj[u] >> v) & 1:
            continue
        allowed = full & ~(adj[u] & adj[v])
        visited = <uint64_t>1 << u
        frontier = visited
        reached = False
        while frontier:
            nxt = 0
            f = frontier
            while f:
                b = __builtin_ctzll(f)
                nxt |= adj[b]
                f &= f - 1
            nxt &= allowed & ~visited
            if (nxt >> v) & 1:
                reached = True
                break
            visited |= nxt
            frontier = nxt
        if not reached:
            adj[u] |= <uint64_t>1 << v
            adj[v] |= <uint64_t>1 << u
            acc[k] = True
    return out


def close_pair_count(P, double threshold):
    cdef double[:, ::1] pts = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0], d = pts.shape[1], i, j, k
    cdef double t2 = threshold * threshold, s, diff
    cdef long count = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = pts[i, k] - pts[j, k]
                s += diff * diff
            if s < t2:
                count += 1
    return count


def clayton_factor_logdensity(logx, factors, double theta):
    cdef double[:, ::1] lx = np.ascontiguousarray(logx, dtype=np.float64)
    cdef Py_ssize_t N = lx.shape[0], r, j
    cdef double inv = 1.0 / theta
    cdef double s, sl, const
    cdef long[::1] idx
    cdef Py_ssize_t k
    out = np.zeros(N)
    cdef double[::1] o = out
    for f in factors:
        idx = np.ascontiguousarray(f, dtype=np.int64)
        k = idx.shape[0]
        if k < 2:
            continue
        const = k * log(theta) + lgamma(k + inv) - lgamma(inv)
        with nogil:
            for r in range(N):
                s = 1.0
                sl = 0.0
                for j in range(k):
                    s += expm1(-theta * lx[r, idx[j]])
                    sl += lx[r, idx[j]]
                o[r] += const - (k + inv) * log(s) - (1.0 + theta) * sl
    return out
