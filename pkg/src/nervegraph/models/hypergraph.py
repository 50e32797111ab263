"""Complete-set Clayton factor models on hypergraphs.

The density is ``c_G * prod_a phi(x_a)`` over maximal simplices ``a``; the
normalizer ``c_G`` has no closed form and is estimated by Monte Carlo with a
uniform proposal on the unit cube.
"""
from __future__ import annotations

import hashlib
import threading

import numpy as np

from nervegraph import kernels
from nervegraph.models.clayton import check_unit_open

DEFAULT_M = 200_000
MIN_M = 1_000
_CHUNK = 50_000


def canonical_simplices(simplices) -> tuple:
    return tuple(sorted(tuple(sorted(int(v) for v in s)) for s in simplices))


def peel_factors(simplices) -> list:
    """Drop factors meeting the rest in at most one vertex, repeatedly.

    Such a factor integrates out exactly: its Clayton density has uniform
    one-dimensional margins, so it contributes a factor of one.
    """
    factors = [tuple(s) for s in canonical_simplices(simplices) if len(s) >= 2]
    changed = True
    while changed:
        changed = False
        for i, f in enumerate(factors):
            rest = set().union(*(factors[:i] + factors[i + 1:])) if len(factors) > 1 else set()
            if len(set(f) & rest) <= 1:
                factors.pop(i)
                changed = True
                break
    return factors


def estimate_log_normalizer(simplices, theta: float, M: int = DEFAULT_M, rng=None,
                            peel: bool = True) -> tuple:
    """Return ``(log c_G, standard error)``.

    ``log c_G = -log(mean of prod phi)`` over ``M`` uniform draws on the
    unit cube spanned by the factors that survive peeling; the error is the
    delta-method standard error ``sd / (sqrt(M) * mean)``.
    """
    if M < MIN_M:
        raise ValueError(f"M must be at least {MIN_M}")
    if not theta > 0:
        raise ValueError("theta must be positive")
    if rng is None:
        rng = np.random.default_rng()
    factors = peel_factors(simplices) if peel else [s for s in canonical_simplices(simplices) if len(s) >= 2]
    if not factors:
        return 0.0, 0.0
    verts = sorted(set().union(*factors))
    col = {v: i for i, v in enumerate(verts)}
    local = [np.array([col[v] for v in f]) for f in factors]
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < M:
        m = min(_CHUNK, M - done)
        logu = np.log(rng.random((m, len(verts))))
        w = np.exp(kernels.clayton_factor_logdensity(logu, local, float(theta)))
        total += float(np.sum(w))
        total_sq += float(np.sum(w * w))
        done += m
    mean = total / M
    var = max(total_sq / M - mean * mean, 0.0) * M / (M - 1)
    return -float(np.log(mean)), float(np.sqrt(var / M) / mean)


def _key_seed(structure: tuple) -> int:
    digest = hashlib.sha256(repr(structure).encode()).digest()
    return int.from_bytes(digest[:8], "little")


class NormalizerCache:
    """Memo of ``(log c_G, SE)`` keyed by the factors that survive peeling, and theta.

    Structures that differ only in peelable factors share one normalizer,
    so they also share one estimate and compare without Monte Carlo noise.
    Theta is keyed to 12 significant digits. Estimates use a generator
    seeded from ``(seed, core)``, so every theta for one core sees the same
    uniform draws and repeated runs are reproducible.
    """

    def __init__(self, M: int = DEFAULT_M, seed: int = 0, peel: bool = True):
        if M < MIN_M:
            raise ValueError(f"M must be at least {MIN_M}")
        self.M = M
        self.seed = seed
        self.peel = peel
        self._store = {}
        self._lock = threading.Lock()
        self.n_estimates = 0

    def key(self, simplices, theta: float) -> tuple:
        if self.peel:
            core = tuple(peel_factors(simplices))
        else:
            core = tuple(s for s in canonical_simplices(simplices) if len(s) >= 2)
        return core, float(f"{theta:.12g}")

    def __len__(self):
        return len(self._store)

    def __contains__(self, item) -> bool:
        return self.key(*item) in self._store

    def get(self, simplices, theta: float) -> tuple:
        k = self.key(simplices, theta)
        with self._lock:
            hit = self._store.get(k)
        if hit is not None:
            return hit
        rng = np.random.default_rng([self.seed, _key_seed(k[0])])
        value = estimate_log_normalizer(k[0], k[1], self.M, rng, peel=False)
        with self._lock:
            self._store[k] = value
            self.n_estimates += 1
        return value


def hypergraph_log_likelihood(data, simplices, theta: float, cache: NormalizerCache | None = None,
                              logx=None) -> float:
    """``N log c_G`` plus the summed factor log-densities over all rows."""
    if logx is None:
        logx = np.log(check_unit_open(data))
    if cache is None:
        cache = NormalizerCache()
    factors = [np.array(s) for s in canonical_simplices(simplices) if len(s) >= 2]
    log_c, _ = cache.get(simplices, theta)
    body = kernels.clayton_factor_logdensity(logx, factors, float(theta))
    return float(logx.shape[0] * log_c + np.sum(body))
