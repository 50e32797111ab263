"""Point-process priors over vertex configurations, and the Erdős–Rényi baseline.

A configuration is an ``(n, d)`` float array. Samplers take an explicit
``numpy.random.Generator``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nervegraph import kernels
from nervegraph.graphs import LabeledGraph

WINDOW_TOL = 1e-12


class DensityUnavailable(NotImplementedError):
    """The prior can be sampled but has no pointwise density."""


class PackingError(RuntimeError):
    """A hard-core sampler ran out of attempts."""


@dataclass(frozen=True)
class Window:
    kind: str = "ball"  # "ball" (unit ball) or "square" (unit square/cube)
    d: int = 2

    def __post_init__(self):
        if self.kind not in ("ball", "square"):
            raise ValueError(f"unknown window {self.kind!r}")
        if self.d < 1:
            raise ValueError("dimension must be positive")

    def contains(self, P) -> bool:
        P = np.asarray(P, dtype=float)
        if P.ndim != 2 or P.shape[1] != self.d:
            return False
        if self.kind == "ball":
            return bool(np.all(np.sum(P * P, axis=1) <= 1.0 + WINDOW_TOL))
        return bool(np.all((P >= -WINDOW_TOL) & (P <= 1.0 + WINDOW_TOL)))

    def check(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        if not self.contains(P):
            raise ValueError(f"configuration outside the {self.kind} window in R^{self.d}")
        return P

    def sample(self, n: int, rng) -> np.ndarray:
        if self.kind == "square":
            return rng.random((n, self.d))
        return uniform_ball(n, self.d, rng)


def uniform_ball(n: int, d: int, rng) -> np.ndarray:
    """``n`` uniform points in the unit ball: U^(1/d) radius times a uniform direction."""
    z = rng.standard_normal((n, d))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    rad = rng.random((n, 1)) ** (1.0 / d)
    return z / norms * rad


def sample_uniform(n: int, window: Window, rng) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    return window.sample(n, rng)


def strauss_log_density(P, gamma: float, R: float) -> float:
    if gamma == 1.0:
        return 0.0
    return kernels.close_pair_count(np.asarray(P, float), 2.0 * R) * float(np.log(gamma))


def sample_strauss_fixed_n(n: int, gamma: float, R: float, window: Window, rng,
                           burn_in: int = 200, init=None) -> np.ndarray:
    """Fixed-n Strauss process by Metropolis single-point relocation.

    Each sweep proposes ``n`` uniform relocations of a uniformly chosen point,
    accepted with probability ``gamma ** (change in close-pair count)``.
    """
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if R <= 0:
        raise ValueError("R must be positive")
    if gamma == 1.0 or n < 2:
        # the target is uniform: an independent draw is an exact sample
        return window.sample(n, rng)
    P = window.sample(n, rng) if init is None else window.check(init).copy()
    log_g = np.log(gamma)
    thr2 = (2.0 * R) ** 2
    for _ in range(burn_in):
        for _ in range(n):
            i = rng.integers(n)
            new = window.sample(1, rng)[0]
            others = np.delete(P, i, axis=0)
            old_close = np.count_nonzero(np.sum((others - P[i]) ** 2, axis=1) < thr2)
            new_close = np.count_nonzero(np.sum((others - new) ** 2, axis=1) < thr2)
            if np.log(rng.random()) < (new_close - old_close) * log_g:
                P[i] = new
    return P


def sample_matern3(n: int, rho: float, window: Window, rng, max_attempts: int = 100_000) -> np.ndarray:
    """Matérn III hard-core configuration with exactly ``n`` retained points.

    Primary points arrive one at a time at uniform locations; an arrival is
    retained unless it lies within ``2 * rho`` of a point already retained.
    Arrivals continue until ``n`` points are retained.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    thr2 = (2.0 * rho) ** 2
    kept = np.empty((n, window.d))
    m = 0
    attempts = 0
    batch = max(4 * n, 64)
    while m < n:
        cand = window.sample(batch, rng)
        for c in cand:
            attempts += 1
            if attempts > max_attempts:
                raise PackingError(f"retained {m} of {n} points after {max_attempts} arrivals")
            if m == 0 or np.min(np.sum((kept[:m] - c) ** 2, axis=1)) >= thr2:
                kept[m] = c
                m += 1
                if m == n:
                    break
    return kept


def sample_erdos_renyi(n: int, p: float, rng) -> LabeledGraph:
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return LabeledGraph(n, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))


# ------------------------------------------------------------ prior objects


@dataclass(frozen=True)
class UniformPrior:
    window: Window = Window()

    kind = "uniform"

    def sample(self, n: int, rng) -> np.ndarray:
        return sample_uniform(n, self.window, rng)

    def log_density(self, P) -> float:
        self.window.check(P)
        return 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class StraussPrior:
    gamma: float
    R: float
    window: Window = Window()
    burn_in: int = 200

    kind = "strauss"

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.R <= 0:
            raise ValueError("R must be positive")

    def sample(self, n: int, rng) -> np.ndarray:
        return sample_strauss_fixed_n(n, self.gamma, self.R, self.window, rng, self.burn_in)

    def log_density(self, P) -> float:
        return strauss_log_density(self.window.check(P), self.gamma, self.R)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma, "R": self.R}


@dataclass(frozen=True)
class MaternPrior:
    rho: float
    window: Window = Window()
    max_attempts: int = 100_000

    kind = "matern3"

    def sample(self, n: int, rng) -> np.ndarray:
        return sample_matern3(n, self.rho, self.window, rng, self.max_attempts)

    def log_density(self, P):
        raise DensityUnavailable("Matérn III has no tractable pointwise density")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rho": self.rho}


def log_density(prior, P) -> float:
    return prior.log_density(P)


def prior_from_dict(spec: dict, window: Window):
    kind = spec.get("kind", "uniform")
    if kind == "uniform":
        return UniformPrior(window)
    if kind == "strauss":
        return StraussPrior(float(spec["gamma"]), float(spec["R"]), window, int(spec.get("burn_in", 200)))
    if kind == "matern3":
        return MaternPrior(float(spec["rho"]), window, int(spec.get("max_attempts", 100_000)))
    raise ValueError(f"unknown prior kind {kind!r}")
