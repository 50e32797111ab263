"""Pure-Python/numpy implementations of the hot kernels.

These are the reference versions. ``_kernels.pyx`` mirrors every function
here with the same signature and semantics; ``nervegraph.kernels`` picks the
compiled module when it imports and falls back to this one otherwise.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

_IN_BALL_TOL = 1e-12


def _circumball(support):
    """Smallest ball with every support point on its boundary.

    The center is constrained to the affine hull of the support. Affinely
    dependent supports are solved in the least-squares sense.
    """
    p0 = support[0]
    if len(support) == 1:
        return p0.copy(), 0.0
    A = np.array([p - p0 for p in support[1:]])
    G = A @ A.T
    rhs = 0.5 * np.einsum("ij,ij->i", A, A)
    try:
        lam = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        lam = np.linalg.lstsq(G, rhs, rcond=None)[0]
    offset = A.T @ lam
    return p0 + offset, float(np.sqrt(offset @ offset))


def _mtf(points, end, support, dim):
    # move-to-front Welzl recursion; `points` is reordered in place
    center, radius = _circumball(support) if support else (None, -1.0)
    if len(support) == dim + 1:
        return center, radius
    i = 0
    while i < end:
        p = points[i]
        if center is None or np.sqrt(np.sum((p - center) ** 2)) > radius * (1 + _IN_BALL_TOL) + _IN_BALL_TOL:
            center, radius = _mtf(points, i, support + [p], dim)
            points.insert(0, points.pop(i))
        i += 1
    return center, radius


def miniball(P):
    """Center and radius of the smallest enclosing ball of the rows of ``P``."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise ValueError("miniball needs a nonempty (k, d) array")
    pts = [row.copy() for row in P]
    center, radius = _mtf(pts, len(pts), [], P.shape[1])
    return center, radius


def miniball_radius(P):
    return miniball(P)[1]


def decomposable_edges(n, us, vs):
    """Greedy chordality-preserving edge acceptance.

    Edges ``(us[k], vs[k])`` are proposed in order and accepted iff the graph
    stays chordal, tested as: the endpoints are disconnected once their
    common neighbours are removed. Returns a boolean acceptance mask.
    """
    adj = [0] * n
    accepted = np.zeros(len(us), dtype=bool)
    full = (1 << n) - 1
    for k in range(len(us)):
        u, v = int(us[k]), int(vs[k])
        if (adj[u] >> v) & 1:
            continue
        allowed = full & ~(adj[u] & adj[v])
        visited = frontier = 1 << u
        reached = False
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= adj[low.bit_length() - 1]
                f ^= low
            nxt &= allowed & ~visited
            if (nxt >> v) & 1:
                reached = True
                break
            visited |= nxt
            frontier = nxt
        if not reached:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
            accepted[k] = True
    return accepted


def close_pair_count(P, threshold):
    """Number of unordered pairs of rows of ``P`` at distance < ``threshold``."""
    P = np.asarray(P, dtype=float)
    diff = P[:, None, :] - P[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    iu = np.triu_indices(len(P), k=1)
    return int(np.count_nonzero(d2[iu] < threshold * threshold))


def clayton_factor_logdensity(logx, factors, theta):
    """Row-wise sum of Clayton log-densities over the column groups ``factors``.

    ``logx`` holds log-coordinates, shape (N, n). Factors of size one
    contribute zero because Clayton margins are uniform.
    """
    logx = np.asarray(logx, dtype=float)
    out = np.zeros(logx.shape[0])
    inv = 1.0 / theta
    for f in factors:
        k = len(f)
        if k < 2:
            continue
        lx = logx[:, f]
        s = 1.0 + np.sum(np.expm1(-theta * lx), axis=1)
        const = k * np.log(theta) + gammaln(k + inv) - gammaln(inv)
        out += const - (k + inv) * np.log(s) - (1.0 + theta) * np.sum(lx, axis=1)
    return out
