"""Clayton copula densities, samplers and junction-tree models.

Data for copula models live strictly inside the open unit cube; values on
or outside the boundary are rejected, never clamped.
"""
from __future__ import annotations

import numpy as np

from nervegraph import kernels


def check_unit_open(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0) or np.any(x >= 1.0):
        raise ValueError("copula data must lie strictly inside (0, 1)")
    return x


def _check_theta(theta):
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")


def clayton_log_density(x, theta: float):
    """Log-density of the exchangeable Clayton copula.

    ``x`` is one point (shape ``(k,)``) or a batch (shape ``(N, k)``); a
    batch returns an array of row values. ``k == 1`` gives 0.
    """
    _check_theta(theta)
    x = check_unit_open(x)
    single = x.ndim == 1
    X = x[None, :] if single else x
    k = X.shape[1]
    out = kernels.clayton_factor_logdensity(np.log(X), [np.arange(k)], float(theta))
    return float(out[0]) if single else out


def clayton_cdf(x, theta: float):
    """Clayton distribution function on (0, 1]^k; batched over rows like the density."""
    _check_theta(theta)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0) or np.any(x > 1.0):
        raise ValueError("Clayton CDF is defined on (0, 1]")
    s = 1.0 + np.sum(np.expm1(-theta * np.log(x)), axis=-1)
    return s ** (-1.0 / theta)


def sample_clayton(n_I: int, theta: float, rng, size: int | None = None) -> np.ndarray:
    """Gamma-frailty draws: W ~ Gamma(1/theta), U_i = (1 + E_i/W)^(-1/theta)."""
    _check_theta(theta)
    m = 1 if size is None else size
    W = rng.gamma(1.0 / theta, 1.0, size=(m, 1))
    E = rng.exponential(1.0, size=(m, n_I))
    U = np.exp(-np.log1p(E / W) / theta)
    return U[0] if size is None else U


def sample_clayton_conditional(given, n_new: int, theta: float, rng) -> np.ndarray:
    """Draw ``n_new`` further coordinates given the rows of ``given``.

    Coordinates are added one at a time by inverting the conditional CDF
    ``(A / (A + t)) ** (1/theta + m)``, where ``t = x**-theta - 1`` and
    ``A = 1 + sum(x_i**-theta - 1)`` over the ``m`` coordinates already fixed.
    """
    _check_theta(theta)
    given = np.asarray(given, dtype=float)
    N, m = given.shape
    A = 1.0 + np.sum(np.expm1(-theta * np.log(given)), axis=1) if m else np.ones(N)
    out = np.empty((N, n_new))
    for k in range(n_new):
        u = rng.random(N)
        shape = 1.0 / theta + m + k
        t = A * np.expm1(-np.log(u) / shape)
        out[:, k] = np.exp(-np.log1p(t) / theta)
        A = A + t
    return out


def _traversal(jt):
    """(clique index, separator) pairs in root-first order for every tree component."""
    seen = set()
    order = []
    for root in range(len(jt.cliques)):
        if root in seen:
            continue
        seen.add(root)
        order.append((root, ()))
        stack = [root]
        while stack:
            a = stack.pop()
            for b, sep in sorted(jt.neighbors(a)):
                if b not in seen:
                    seen.add(b)
                    order.append((b, sep))
                    stack.append(b)
    return order


def sample_junction_tree_model(jt, theta: float, N: int, rng) -> np.ndarray:
    """Rows from the junction-tree density with Clayton clique marginals.

    A root clique is drawn jointly, then each neighbouring clique is drawn
    conditionally on its separator.
    """
    _check_theta(theta)
    X = np.full((N, jt.n_vertices), np.nan)
    if N == 0:
        return np.empty((0, jt.n_vertices))
    for ci, sep in _traversal(jt):
        clique = jt.cliques[ci]
        new = [v for v in clique if v not in sep]
        if not sep:
            X[:, list(clique)] = sample_clayton(len(clique), theta, rng, size=N)
        else:
            X[:, new] = sample_clayton_conditional(X[:, list(sep)], len(new), theta, rng)
    missing = np.isnan(X).any(axis=0)
    if missing.any():
        raise ValueError("junction tree does not cover every vertex")
    return X


def jt_log_likelihood(data, jt, theta: float, logx=None) -> float:
    """Sum over rows of clique log-densities minus separator log-densities."""
    _check_theta(theta)
    if logx is None:
        logx = np.log(check_unit_open(data))
    num = kernels.clayton_factor_logdensity(logx, [np.array(c) for c in jt.cliques], float(theta))
    den = kernels.clayton_factor_logdensity(logx, [np.array(s) for s in jt.separators], float(theta))
    return float(np.sum(num) - np.sum(den))
