"""Likelihood backends used by the posterior chain.

A backend scores a canonical structure (sorted tuple of cliques or maximal
simplices, 0-based) at a given theta. ``structure`` says which nerve view the
chain must hand it: ``"graph"`` (cliques of a graph) or ``"simplices"``.
"""
from __future__ import annotations

import numpy as np

from nervegraph import kernels
from nervegraph.graphs import graph_from_blocks, is_decomposable, junction_tree
from nervegraph.models.clayton import check_unit_open
from nervegraph.models.gaussian import HIWHyper, hiw_log_marginal
from nervegraph.models.hypergraph import NormalizerCache, hypergraph_log_likelihood


class Backend:
    name = "base"
    uses_theta = True
    structure = "graph"
    requires_decomposable = False
    data_mode = "copula"

    def log_likelihood(self, blocks: tuple, theta: float) -> float:
        raise NotImplementedError


class FlatBackend(Backend):
    """Constant likelihood; the posterior chain then targets the prior."""

    name = "flat"
    uses_theta = False

    def __init__(self, n_vertices: int, structure: str = "graph"):
        self.n_vertices = n_vertices
        self.structure = structure

    def log_likelihood(self, blocks, theta=None) -> float:
        return 0.0


class ClaytonJTBackend(Backend):
    name = "clayton-jt"
    requires_decomposable = True

    def __init__(self, data):
        self.logx = np.log(check_unit_open(data))
        self.n_vertices = self.logx.shape[1]
        self._jt = {}

    def junction_tree(self, blocks):
        jt = self._jt.get(blocks)
        if jt is None:
            G = graph_from_blocks(self.n_vertices, blocks)
            if not is_decomposable(G):
                raise RuntimeError(f"non-decomposable structure reached {self.name}")
            jt = junction_tree(G)
            self._jt[blocks] = jt
        return jt

    def log_likelihood(self, blocks, theta) -> float:
        jt = self.junction_tree(blocks)
        num = kernels.clayton_factor_logdensity(self.logx, [np.array(c) for c in jt.cliques], float(theta))
        den = kernels.clayton_factor_logdensity(self.logx, [np.array(s) for s in jt.separators], float(theta))
        return float(np.sum(num) - np.sum(den))


class ClaytonHypergraphBackend(Backend):
    name = "clayton-hypergraph"
    structure = "simplices"

    def __init__(self, data, cache: NormalizerCache | None = None):
        self.logx = np.log(check_unit_open(data))
        self.n_vertices = self.logx.shape[1]
        self.cache = cache if cache is not None else NormalizerCache()

    def log_likelihood(self, blocks, theta) -> float:
        return hypergraph_log_likelihood(None, blocks, theta, self.cache, logx=self.logx)


class GaussianHIWBackend(Backend):
    name = "gaussian-hiw"
    uses_theta = False
    requires_decomposable = True
    data_mode = "real"

    def __init__(self, data, hyper: HIWHyper):
        self.X = np.asarray(data, dtype=float)
        if not np.all(np.isfinite(self.X)):
            raise ValueError("Gaussian data must be finite")
        self.n_vertices = self.X.shape[1]
        if hyper.D.shape != (self.n_vertices, self.n_vertices):
            raise ValueError("D must match the number of variables")
        self.hyper = hyper
        self._memo = {}

    def log_likelihood(self, blocks, theta=None) -> float:
        val = self._memo.get(blocks)
        if val is None:
            G = graph_from_blocks(self.n_vertices, blocks)
            if not is_decomposable(G):
                raise RuntimeError(f"non-decomposable structure reached {self.name}")
            val = hiw_log_marginal(self.X, G, self.hyper)
            self._memo[blocks] = val
        return val
