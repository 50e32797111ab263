"""Simplicial complexes, nerve constructions and filtrations.

Simplices are sorted tuples of 0-based vertex indices. Every complex
contains all of its vertices, so the vertex-only complex is the bottom of
every filtration.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from nervegraph import kernels
from nervegraph.geometry import (
    EPS_GEOM,
    SUPPORTED_DIMS,
    DegenerateInputError,
    GeometryError,
    as_points,
    circumball,
    delaunay,
    pairwise_distances,
)

KINDS = ("cech", "alpha", "delaunay")
RADIUS_MERGE_TOL = 1e-12


def _canon(simplex) -> tuple:
    return tuple(sorted(int(v) for v in simplex))


def _faces(simplex):
    k = len(simplex)
    for size in range(1, k + 1):
        yield from itertools.combinations(simplex, size)


def closure(simplices) -> set:
    out = set()
    for s in simplices:
        s = _canon(s)
        if s in out:
            continue
        out.update(_faces(s))
    return out


@dataclass(frozen=True)
class SimplicialComplex:
    n_vertices: int
    simplices: frozenset

    def __post_init__(self):
        for s in self.simplices:
            if not s or any(v < 0 or v >= self.n_vertices for v in s):
                raise ValueError(f"simplex {s} out of range for {self.n_vertices} vertices")
            if len(s) > 1:
                for v in s:
                    face = tuple(u for u in s if u != v)
                    if face not in self.simplices:
                        raise ValueError(f"not downward closed: {s} present, {face} missing")
        for v in range(self.n_vertices):
            if (v,) not in self.simplices:
                raise ValueError(f"vertex {v} missing")

    @classmethod
    def from_simplices(cls, n_vertices: int, simplices=()) -> "SimplicialComplex":
        """Downward closure of ``simplices`` plus every vertex."""
        s = closure(simplices)
        s.update((v,) for v in range(n_vertices))
        return cls(n_vertices, frozenset(s))

    @classmethod
    def vertex_only(cls, n_vertices: int) -> "SimplicialComplex":
        return cls(n_vertices, frozenset((v,) for v in range(n_vertices)))

    def __contains__(self, simplex) -> bool:
        return _canon(simplex) in self.simplices

    def __len__(self) -> int:
        return len(self.simplices)

    def __le__(self, other: "SimplicialComplex") -> bool:
        return self.n_vertices == other.n_vertices and self.simplices <= other.simplices

    def __lt__(self, other: "SimplicialComplex") -> bool:
        return self.n_vertices == other.n_vertices and self.simplices < other.simplices

    @property
    def dim(self) -> int:
        return max((len(s) for s in self.simplices), default=0) - 1

    def edges(self) -> list:
        return sorted(s for s in self.simplices if len(s) == 2)

    def of_size(self, k: int) -> list:
        return sorted(s for s in self.simplices if len(s) == k)

    def to_json(self) -> dict:
        return {
            "n_vertices": self.n_vertices,
            "maximal_simplices": [[v + 1 for v in s] for s in maximal_simplices(self)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SimplicialComplex":
        n = int(obj["n_vertices"])
        simplices = [[int(v) - 1 for v in s] for s in obj["maximal_simplices"]]
        return cls.from_simplices(n, simplices)


def maximal_simplices(K: SimplicialComplex) -> list:
    kept = []
    for s in sorted(K.simplices, key=lambda t: (-len(t), t)):
        ss = set(s)
        if not any(ss < set(t) for t in kept):
            kept.append(s)
    return sorted(kept)


def p_skeleton(K: SimplicialComplex, p: int) -> SimplicialComplex:
    if p < 0:
        raise ValueError("p must be nonnegative")
    return SimplicialComplex(K.n_vertices, frozenset(s for s in K.simplices if len(s) <= p + 1))


def component_count(K: SimplicialComplex) -> int:
    parent = list(range(K.n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    count = K.n_vertices
    for u, v in K.edges():
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            count -= 1
    return count


@dataclass(frozen=True)
class NerveClass:
    kind: str
    d: int = 2

    def __post_init__(self):
        kind = self.kind.lower().replace("č", "c")
        if kind not in KINDS:
            raise ValueError(f"unknown nerve class {self.kind!r}; expected one of {KINDS}")
        if self.d not in SUPPORTED_DIMS:
            raise ValueError(f"dimension {self.d} not supported")
        object.__setattr__(self, "kind", kind)

    @property
    def max_simplex_size(self):
        return None if self.kind == "cech" else self.d + 1


# ---------------------------------------------------------------- Čech


def cech_values(V, r_max: float | None, max_card: int) -> dict:
    """Miniball radius of every subset with radius <= ``r_max`` (all if None)."""
    P = as_points(V)
    n = len(P)
    if max_card < 1:
        raise ValueError("max_card must be at least 1")
    values = {(v,): 0.0 for v in range(n)}
    if n < 2 or max_card < 2:
        return values
    half = pairwise_distances(P) / 2.0
    bound = np.inf if r_max is None else r_max
    nbrs = [set(np.nonzero(half[i] <= bound)[0].tolist()) - {i} for i in range(n)]
    level = []
    for i in range(n):
        for j in sorted(nbrs[i]):
            if j > i:
                values[(i, j)] = float(half[i, j])
                level.append((i, j))
    for _ in range(3, max_card + 1):
        nxt = []
        for s in level:
            common = set.intersection(*(nbrs[v] for v in s))
            for w in sorted(common):
                if w <= s[-1]:
                    continue
                t = s + (w,)
                # all proper faces must already be in; prefix face is s itself
                if any(t[:k] + t[k + 1:] not in values for k in range(len(t) - 1)):
                    continue
                rad = float(kernels.miniball_radius(P[list(t)]))
                if rad <= bound:
                    values[t] = rad
                    nxt.append(t)
        if not nxt:
            break
        level = nxt
    return values


def cech_complex(V, r: float, max_card: int = 2) -> SimplicialComplex:
    """Čech nerve of closed balls of radius ``r``, enumerated up to ``max_card``."""
    if r <= 0:
        raise GeometryError(f"radius must be positive, got {r}")
    if max_card < 2:
        raise ValueError("max_card must be at least 2")
    P = as_points(V)
    values = cech_values(P, r, max_card)
    return SimplicialComplex(len(P), frozenset(values))


# ------------------------------------------------------ Delaunay / Alpha


def delaunay_tops(V) -> list:
    """Top simplices of the Delaunay closure; handles n <= d+1 directly."""
    P = as_points(V, SUPPORTED_DIMS)
    n, d = P.shape
    if n <= d + 1:
        if n > 1:
            A = P[1:] - P[0]
            sv = np.linalg.svd(A, compute_uv=False)
            if sv[-1] <= EPS_GEOM * max(1.0, sv[0]):
                raise DegenerateInputError("points are affinely dependent")
        return [tuple(range(n))]
    return list(delaunay(P).simplices)


def delaunay_complex(V) -> SimplicialComplex:
    P = as_points(V, SUPPORTED_DIMS)
    return SimplicialComplex.from_simplices(len(P), delaunay_tops(P))


def alpha_values(V, tops=None) -> dict:
    """Alpha value of every simplex of the Delaunay closure.

    Top simplices get their circumradius. A lower face is attached when the
    opposite vertex of one of its cofaces lies strictly inside its smallest
    circumball; attached faces inherit the minimum value of their cofaces,
    others get their own smallest circumradius.
    """
    P = as_points(V, SUPPORTED_DIMS)
    if tops is None:
        tops = delaunay_tops(P)
    simplices = closure(tops)
    cofaces = {}
    for s in simplices:
        if len(s) > 1:
            for i in range(len(s)):
                cofaces.setdefault(s[:i] + s[i + 1:], []).append((s, s[i]))
    values = {}
    for s in sorted(simplices, key=lambda t: (-len(t), t)):
        if len(s) == 1:
            values[s] = 0.0
            continue
        ball = circumball(P[list(s)])
        cof = cofaces.get(s, [])
        attached = any(
            np.linalg.norm(P[opp] - ball.center) < ball.radius - EPS_GEOM for _, opp in cof
        )
        values[s] = min(values[t] for t, _ in cof) if attached else ball.radius
    return values


def alpha_complex(V, r: float) -> SimplicialComplex:
    if r <= 0:
        raise GeometryError(f"radius must be positive, got {r}")
    P = as_points(V, SUPPORTED_DIMS)
    vals = alpha_values(P)
    return SimplicialComplex(len(P), frozenset(s for s, a in vals.items() if a <= r))


def nerve(V, cls: NerveClass, r: float, max_card: int | None = None) -> SimplicialComplex:
    """Nerve of class ``cls`` at radius ``r`` (Delaunay ignores ``r``)."""
    P = as_points(V)
    if cls.kind == "cech":
        return cech_complex(P, r, max_card if max_card is not None else max(len(P), 2))
    if cls.kind == "alpha":
        K = alpha_complex(P, r)
    else:
        K = delaunay_complex(P)
    if max_card is not None:
        K = p_skeleton(K, max_card - 1)
    return K


# ------------------------------------------------------------ filtration


@dataclass(frozen=True)
class Filtration:
    """Simplices tagged with the radius at which they enter.

    ``entries`` holds ``(radius, simplex)`` for every simplex of size >= 2,
    sorted by radius, then size, then lexicographically. ``critical_radii``
    has one entry per distinct radius (merged within 1e-12) and
    ``complexes[i+1]`` is the complex at ``critical_radii[i]``;
    ``complexes[0]`` is vertex-only.
    """

    n_vertices: int
    entries: tuple
    r_max: float | None = None
    _groups: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        groups = []
        for rad, s in self.entries:
            if groups and rad - groups[-1][0] <= RADIUS_MERGE_TOL:
                groups[-1][1].append(s)
            else:
                groups.append((rad, [s]))
        object.__setattr__(self, "_groups", tuple((r, tuple(ss)) for r, ss in groups))

    @property
    def critical_radii(self) -> list:
        return [r for r, _ in self._groups]

    @cached_property
    def complexes(self) -> list:
        current = {(v,) for v in range(self.n_vertices)}
        out = [SimplicialComplex(self.n_vertices, frozenset(current))]
        for _, ss in self._groups:
            current.update(ss)
            out.append(SimplicialComplex(self.n_vertices, frozenset(current)))
        return out

    def edge_events(self) -> list:
        """``(radius, (u, v))`` for each edge in proposal order."""
        return [(r, s) for r, s in self.entries if len(s) == 2]

    def final(self) -> SimplicialComplex:
        return self.complexes[-1]


def _sorted_entries(values: dict) -> tuple:
    items = [(float(r), s) for s, r in values.items() if len(s) >= 2]
    items.sort(key=lambda e: (e[0], len(e[1]), e[1]))
    return tuple(items)


def build_filtration(V, cls: NerveClass, max_card: int = 2, r_max: float | None = None) -> Filtration:
    """Filtration of ``cls`` nerves as the radius sweeps upward.

    Čech simplices enter at their miniball radius, Alpha simplices at their
    alpha value. The Delaunay nerve has no radius, so its simplices are
    ordered by miniball radius and the final complex is the Delaunay closure.
    """
    P = as_points(V)
    if cls.kind == "cech":
        values = cech_values(P, r_max, max_card)
    else:
        tops = delaunay_tops(P)
        if cls.kind == "alpha":
            values = alpha_values(P, tops)
        else:
            values = {s: float(kernels.miniball_radius(P[list(s)])) for s in closure(tops)}
        values = {s: v for s, v in values.items() if len(s) <= max_card}
        if r_max is not None:
            values = {s: v for s, v in values.items() if v <= r_max}
    return Filtration(len(P), _sorted_entries(values), r_max)
