"""Gaussian graphical models with a hyper-inverse-Wishart prior.

For a decomposable graph the HIW normalizer factorizes over the junction
tree: ``I_G = prod_C h(delta, D_C) / prod_S h(delta, D_S)`` with
``h(delta, D_A) = |D_A/2|^(-(delta+|A|-1)/2) * Gamma_|A|((delta+|A|-1)/2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import multigammaln

from nervegraph.graphs import LabeledGraph, is_decomposable, junction_tree


@dataclass(frozen=True)
class HIWHyper:
    delta: float
    D: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.D, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or not np.allclose(D, D.T):
            raise ValueError("D must be a symmetric square matrix")
        np.linalg.cholesky(D)
        if not self.delta > 2:
            raise ValueError("delta must exceed 2")
        object.__setattr__(self, "D", D)


def log_h(delta: float, D_A) -> float:
    """Log inverse-Wishart normalizing term for one clique or separator."""
    D_A = np.atleast_2d(np.asarray(D_A, dtype=float))
    a = D_A.shape[0]
    sign, logdet = np.linalg.slogdet(D_A / 2.0)
    if sign <= 0:
        raise np.linalg.LinAlgError("submatrix is not positive definite")
    nu = (delta + a - 1) / 2.0
    return float(-nu * logdet + multigammaln(nu, a))


def log_hiw_normalizer(delta: float, D, jt) -> float:
    D = np.asarray(D, dtype=float)
    out = 0.0
    for c in jt.cliques:
        out += log_h(delta, D[np.ix_(c, c)])
    for s in jt.separators:
        out -= log_h(delta, D[np.ix_(s, s)])
    return out


def hiw_log_marginal(data, G: LabeledGraph, hyper: HIWHyper, jt=None) -> float:
    """Log marginal likelihood of zero-mean Gaussian data under HIW(delta, D)."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[1] != G.n_vertices:
        raise ValueError("data columns must match the graph's vertices")
    if jt is None:
        if not is_decomposable(G):
            raise ValueError("HIW marginal likelihood requires a decomposable graph")
        jt = junction_tree(G)
    N, n = X.shape
    post = log_hiw_normalizer(hyper.delta + N, hyper.D + X.T @ X, jt)
    prior = log_hiw_normalizer(hyper.delta, hyper.D, jt)
    return float(-0.5 * n * N * np.log(2 * np.pi) + post - prior)


def sample_gaussian_model(precision, N: int, rng) -> np.ndarray:
    """``N`` draws from N(0, precision^-1)."""
    K = np.asarray(precision, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or not np.allclose(K, K.T):
        raise ValueError("precision must be a symmetric square matrix")
    try:
        np.linalg.cholesky(K)
    except np.linalg.LinAlgError as exc:
        raise ValueError("precision is not positive definite") from exc
    L = np.linalg.cholesky(np.linalg.inv(K))
    return rng.standard_normal((N, K.shape[0])) @ L.T
