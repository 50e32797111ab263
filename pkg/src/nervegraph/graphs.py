"""Labeled graphs, cliques, junction trees and the filtration-driven
decomposable-graph construction.

Vertices are 0-based internally; serialization and factorization strings use
1-based labels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nervegraph import kernels
from nervegraph.complexes import Filtration, SimplicialComplex


def _edge(u, v) -> tuple:
    u, v = int(u), int(v)
    if u == v:
        raise ValueError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class LabeledGraph:
    n_vertices: int
    edges: frozenset

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < v < self.n_vertices):
                raise ValueError(f"bad edge {(u, v)} for {self.n_vertices} vertices")

    @classmethod
    def from_edges(cls, n_vertices: int, edges=()) -> "LabeledGraph":
        return cls(n_vertices, frozenset(_edge(u, v) for u, v in edges))

    @classmethod
    def complete(cls, n_vertices: int) -> "LabeledGraph":
        return cls.from_edges(n_vertices, [(u, v) for u in range(n_vertices) for v in range(u + 1, n_vertices)])

    def adjacency(self) -> list:
        adj = [set() for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def has_edge(self, u, v) -> bool:
        return _edge(u, v) in self.edges

    def with_edge(self, u, v) -> "LabeledGraph":
        return LabeledGraph(self.n_vertices, self.edges | {_edge(u, v)})

    def components(self) -> list:
        adj = self.adjacency()
        seen = [False] * self.n_vertices
        comps = []
        for s in range(self.n_vertices):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                a = stack.pop()
                comp.append(a)
                for b in adj[a]:
                    if not seen[b]:
                        seen[b] = True
                        stack.append(b)
            comps.append(sorted(comp))
        return comps

    def to_json(self) -> dict:
        return {"n_vertices": self.n_vertices, "edges": [[u + 1, v + 1] for u, v in sorted(self.edges)]}

    @classmethod
    def from_json(cls, obj: dict) -> "LabeledGraph":
        return cls.from_edges(int(obj["n_vertices"]), [(int(u) - 1, int(v) - 1) for u, v in obj["edges"]])


def from_skeleton(K: SimplicialComplex) -> LabeledGraph:
    return LabeledGraph(K.n_vertices, frozenset(s for s in K.simplices if len(s) == 2))


def cliques(G: LabeledGraph) -> list:
    """All maximal cliques, as sorted tuples in lexicographic order."""
    adj = G.adjacency()
    out = []

    def expand(R, P, X):
        if not P and not X:
            out.append(tuple(sorted(R)))
            return
        pivot = max(P | X, key=lambda w: len(adj[w] & P))
        for v in sorted(P - adj[pivot]):
            expand(R | {v}, P & adj[v], X & adj[v])
            P = P - {v}
            X = X | {v}

    expand(set(), set(range(G.n_vertices)), set())
    return sorted(out)


def _mcs_order(adj, n) -> list:
    weight = [0] * n
    numbered = [False] * n
    order = []
    for _ in range(n):
        v = max((w for w in range(n) if not numbered[w]), key=lambda w: (weight[w], -w))
        numbered[v] = True
        order.append(v)
        for w in adj[v]:
            if not numbered[w]:
                weight[w] += 1
    return order


def is_decomposable(G: LabeledGraph) -> bool:
    """Chordality test: maximum cardinality search must give a perfect elimination order."""
    adj = G.adjacency()
    order = _mcs_order(adj, G.n_vertices)
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        earlier = [w for w in adj[v] if pos[w] < pos[v]]
        if not earlier:
            continue
        parent = max(earlier, key=lambda w: pos[w])
        if any(w != parent and w not in adj[parent] for w in earlier):
            return False
    return True


@dataclass(frozen=True)
class JunctionTree:
    """Cliques, tree edges between clique indices, and one separator per edge.

    A separator that occurs on several tree edges is listed once per edge.
    """

    n_vertices: int
    cliques: tuple
    tree_edges: tuple
    separators: tuple

    def neighbors(self, i: int) -> list:
        out = []
        for (a, b), s in zip(self.tree_edges, self.separators):
            if a == i:
                out.append((b, s))
            elif b == i:
                out.append((a, s))
        return out

    def path(self, i: int, j: int) -> list | None:
        """Tree edges (as indices into ``tree_edges``) between cliques i and j."""
        prev = {i: None}
        stack = [i]
        while stack:
            a = stack.pop()
            if a == j:
                break
            for k, (x, y) in enumerate(self.tree_edges):
                b = y if x == a else x if y == a else None
                if b is not None and b not in prev:
                    prev[b] = (a, k)
                    stack.append(b)
        if j not in prev:
            return None
        out = []
        node = j
        while prev[node] is not None:
            node, k = prev[node]
            out.append(k)
        return out[::-1]

    def to_json(self) -> dict:
        return {
            "cliques": [[v + 1 for v in c] for c in self.cliques],
            "separators": [[v + 1 for v in s] for s in self.separators],
            "tree_edges": [[a, b] for a, b in self.tree_edges],
        }


def junction_tree(G: LabeledGraph) -> JunctionTree:
    """Maximum-weight spanning forest of the clique-intersection graph.

    Kruskal on intersection size; ties are broken by the lexicographic order
    of the clique pair, and empty intersections never become tree edges.
    """
    if not is_decomposable(G):
        raise ValueError("junction tree requires a decomposable graph")
    cl = cliques(G)
    cand = []
    for i in range(len(cl)):
        for j in range(i + 1, len(cl)):
            inter = tuple(sorted(set(cl[i]) & set(cl[j])))
            if inter:
                cand.append((-len(inter), cl[i], cl[j], i, j, inter))
    cand.sort()
    parent = list(range(len(cl)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges, seps = [], []
    for _, _, _, i, j, inter in cand:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
            seps.append(inter)
    return JunctionTree(G.n_vertices, tuple(cl), tuple(edges), tuple(seps))


def admissible_edge(G: LabeledGraph, jt: JunctionTree, e) -> bool:
    """Whether ``G + e`` stays decomposable, decided on the junction tree.

    Accept when the endpoints lie in different components; otherwise accept
    iff some cliques ``Ci`` containing u and ``Cj`` containing v have
    ``Ci ∩ Cj`` equal to a separator on the tree path between them.
    """
    u, v = _edge(*e)
    if G.has_edge(u, v):
        raise ValueError(f"edge {(u + 1, v + 1)} already present")
    for ci in (i for i, c in enumerate(jt.cliques) if u in c):
        for cj in (j for j, c in enumerate(jt.cliques) if v in c):
            path = jt.path(ci, cj)
            if path is None:
                return True
            inter = set(jt.cliques[ci]) & set(jt.cliques[cj])
            if any(set(jt.separators[k]) == inter for k in path):
                return True
    return False


def decomposable_from_filtration(F: Filtration, method: str = "kernel") -> LabeledGraph:
    """Greedy decomposable subgraph of the filtration's final 1-skeleton.

    Edges are proposed in entry order and kept iff the graph stays
    decomposable; rejected edges are never revisited. ``method="junction"``
    runs the junction-tree test, ``"kernel"`` the equivalent bitmask test.
    """
    events = F.edge_events()
    if method == "kernel":
        if not events:
            return LabeledGraph(F.n_vertices, frozenset())
        us = np.array([e[1][0] for e in events], dtype=np.int64)
        vs = np.array([e[1][1] for e in events], dtype=np.int64)
        mask = kernels.decomposable_edges(F.n_vertices, us, vs)
        return LabeledGraph(F.n_vertices, frozenset(e[1] for e, keep in zip(events, mask) if keep))
    if method != "junction":
        raise ValueError(f"unknown method {method!r}")
    G = LabeledGraph(F.n_vertices, frozenset())
    for _, e in events:
        if admissible_edge(G, junction_tree(G), e):
            G = G.with_edge(*e)
    return G


@dataclass(frozen=True)
class TraceRow:
    cliques: tuple
    separators: tuple
    radius: float
    edge: tuple | None
    accepted: bool | None


def clique_separator_trace(F: Filtration) -> list:
    """Initial row, then one row per proposed edge with the state after it."""
    G = LabeledGraph(F.n_vertices, frozenset())
    jt = junction_tree(G)
    rows = [TraceRow(jt.cliques, jt.separators, 0.0, None, None)]
    for rad, e in F.edge_events():
        ok = admissible_edge(G, jt, e)
        if ok:
            G = G.with_edge(*e)
            jt = junction_tree(G)
        rows.append(TraceRow(jt.cliques, jt.separators, rad, e, ok))
    return rows


def factorization_string(blocks) -> str:
    """Canonical bracket notation with 1-based labels, e.g. ``[1,2][2,3,5][4]``."""
    canon = sorted(tuple(sorted(int(v) + 1 for v in b)) for b in blocks)
    return "".join("[" + ",".join(str(v) for v in b) + "]" for b in canon)


def parse_factorization(text: str) -> list:
    """Inverse of :func:`factorization_string`; returns 0-based tuples."""
    text = text.strip()
    if not text.startswith("[") or not text.endswith("]"):
        raise ValueError(f"bad factorization {text!r}")
    out = []
    for chunk in text[1:-1].split("]["):
        out.append(tuple(sorted(int(v) - 1 for v in chunk.split(","))))
    return sorted(out)


def graph_from_blocks(n_vertices: int, blocks) -> LabeledGraph:
    edges = set()
    for b in blocks:
        b = sorted(b)
        edges.update((b[i], b[j]) for i in range(len(b)) for j in range(i + 1, len(b)))
    return LabeledGraph(n_vertices, frozenset(edges))
