import itertools

import numpy as np
import pytest

from nervegraph import fixtures
from nervegraph.complexes import NerveClass, SimplicialComplex, alpha_complex, build_filtration, cech_complex
from nervegraph.graphs import (
    LabeledGraph,
    admissible_edge,
    clique_separator_trace,
    cliques,
    decomposable_from_filtration,
    factorization_string,
    from_skeleton,
    graph_from_blocks,
    is_decomposable,
    junction_tree,
    parse_factorization,
)


def random_graph(n, p, rng):
    return LabeledGraph.from_edges(n, [e for e in itertools.combinations(range(n), 2) if rng.random() < p])


def brute_cliques(G):
    adj = G.adjacency()
    n = G.n_vertices
    is_clique = [s for k in range(1, n + 1) for s in itertools.combinations(range(n), k)
                 if all(b in adj[a] for a, b in itertools.combinations(s, 2))]
    sets = [set(s) for s in is_clique]
    return sorted(s for s, ss in zip(is_clique, sets) if not any(ss < t for t in sets))


def brute_chordal(G):
    """No induced cycle on four or more vertices."""
    adj = G.adjacency()
    for k in range(4, G.n_vertices + 1):
        for S in itertools.combinations(range(G.n_vertices), k):
            sub = {v: adj[v] & set(S) for v in S}
            if any(len(nb) != 2 for nb in sub.values()):
                continue
            seen, stack = {S[0]}, [S[0]]
            while stack:
                for w in sub[stack.pop()]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            if len(seen) == k:
                return False
    return True


def random_tree(n, rng):
    return LabeledGraph.from_edges(n, [(i, int(rng.integers(i))) for i in range(1, n)])


def test_labeled_graph_basics():
    with pytest.raises(ValueError):
        LabeledGraph.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        LabeledGraph(3, frozenset({(0, 3)}))
    G = LabeledGraph.from_edges(4, [(1, 0), (2, 3)])
    assert G.edges == {(0, 1), (2, 3)}
    assert G.components() == [[0, 1], [2, 3]]
    assert LabeledGraph.from_json(G.to_json()) == G


def test_from_skeleton_examples():
    assert from_skeleton(SimplicialComplex.vertex_only(4)).edges == frozenset()
    K = cech_complex(fixtures.FACTORIZATION_VERTICES, 0.7, 5)
    assert len(from_skeleton(K).edges) == 7
    T = from_skeleton(SimplicialComplex.from_simplices(3, [(0, 1, 2)]))
    assert T.edges == {(0, 1), (0, 2), (1, 2)}


def test_clique_examples():
    assert cliques(LabeledGraph(5, frozenset())) == [(0,), (1,), (2,), (3,), (4,)]
    assert cliques(LabeledGraph.complete(4)) == [(0, 1, 2, 3)]
    A = from_skeleton(alpha_complex(fixtures.FACTORIZATION_VERTICES, 0.5))
    assert factorization_string(cliques(A)) == "[1,2][2,3,5][4]"


def test_cliques_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(150):
        n = int(rng.integers(1, 11))
        G = random_graph(n, rng.uniform(0.1, 0.9), rng)
        assert cliques(G) == brute_cliques(G)


def test_decomposable_examples():
    assert not is_decomposable(LabeledGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]))
    rng = np.random.default_rng(1)
    for _ in range(20):
        assert is_decomposable(random_tree(int(rng.integers(1, 15)), rng))


def test_decomposable_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(300):
        n = int(rng.integers(1, 9))
        G = random_graph(n, rng.uniform(0.2, 0.8), rng)
        assert is_decomposable(G) == brute_chordal(G)


def running_intersection_holds(jt):
    for i, j in itertools.combinations(range(len(jt.cliques)), 2):
        path = jt.path(i, j)
        inter = set(jt.cliques[i]) & set(jt.cliques[j])
        if path is None:
            if inter:
                return False
            continue
        node = i
        for k in path:
            a, b = jt.tree_edges[k]
            node = b if a == node else a
            if not inter <= set(jt.cliques[node]):
                return False
    return True


def test_junction_tree_examples():
    G = graph_from_blocks(5, parse_factorization("[1,2][2,3,5][4]"))
    assert junction_tree(G).separators == ((1,),)
    G2 = graph_from_blocks(5, parse_factorization("[1,2,4][1,3,4][1,4,5]"))
    assert sorted(junction_tree(G2).separators) == [(0, 3), (0, 3)]
    assert junction_tree(LabeledGraph.complete(4)).separators == ()
    with pytest.raises(ValueError):
        junction_tree(LabeledGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]))


def test_junction_tree_invariants_on_random_chordal_graphs():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 13))
        P = rng.random((n, 2))
        G = decomposable_from_filtration(build_filtration(P, NerveClass("cech", 2), 2, rng.uniform(0.05, 0.4)))
        jt = junction_tree(G)
        assert set().union(*map(set, jt.cliques)) == set(range(n))
        assert np.prod([len(c) for c in jt.cliques]) >= 1
        assert sum(len(c) for c in jt.cliques) >= n
        assert running_intersection_holds(jt)
        assert len(jt.tree_edges) == len(jt.cliques) - len(G.components())


def test_admissible_edge_examples():
    F = build_filtration(fixtures.TRACE_VERTICES, NerveClass("cech", 2), 2, 0.25)
    G = LabeledGraph(5, frozenset())
    for _, e in F.edge_events():
        if e == (0, 1):
            assert not admissible_edge(G, junction_tree(G), e)
            continue
        if e == (0, 3):
            assert admissible_edge(G, junction_tree(G), e)
        G = G.with_edge(*e)
    E = LabeledGraph(3, frozenset())
    assert admissible_edge(E, junction_tree(E), (0, 2))
    with pytest.raises(ValueError):
        G1 = LabeledGraph.from_edges(2, [(0, 1)])
        admissible_edge(G1, junction_tree(G1), (0, 1))


def test_admissible_edge_agrees_with_chordality():
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        P = rng.random((n, 2))
        G = decomposable_from_filtration(build_filtration(P, NerveClass("cech", 2), 2, rng.uniform(0.05, 0.5)))
        jt = junction_tree(G)
        for e in itertools.combinations(range(n), 2):
            if not G.has_edge(*e):
                assert admissible_edge(G, jt, e) == is_decomposable(G.with_edge(*e))


def test_decomposable_from_filtration_trace_fixture():
    F = build_filtration(fixtures.TRACE_VERTICES, NerveClass("cech", 2), 2, 0.25)
    G = decomposable_from_filtration(F)
    assert G.edges == {(0, 2), (3, 4), (1, 4), (1, 3), (2, 3), (0, 3)}
    assert decomposable_from_filtration(F, "junction") == G


def test_decomposable_from_filtration_properties():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 31))
        P = rng.uniform(-1, 1, size=(n, 2))
        F = build_filtration(P, NerveClass(str(rng.choice(["cech", "alpha"])), 2), 2, rng.uniform(0.05, 0.6))
        G = decomposable_from_filtration(F)
        assert is_decomposable(G)
        assert G.edges <= {e for _, e in F.edge_events()}
        if n <= 12:
            assert decomposable_from_filtration(F, "junction") == G


def test_vertex_only_filtration_gives_empty_graph():
    F = build_filtration([[0, 0], [1, 1]], NerveClass("cech", 2), 2, 0.1)
    assert decomposable_from_filtration(F).edges == frozenset()
    assert decomposable_from_filtration(F, "junction").edges == frozenset()


def test_decomposable_skeleton_is_kept_whole():
    # points on a line give a path-like, hence chordal, skeleton
    rng = np.random.default_rng(6)
    for _ in range(30):
        n = int(rng.integers(2, 12))
        P = np.c_[np.sort(rng.random(n)), 1e-3 * rng.random(n)]
        r = rng.uniform(0.02, 0.2)
        F = build_filtration(P, NerveClass("cech", 2), 2, r)
        skel = from_skeleton(cech_complex(P, r, 2))
        if is_decomposable(skel):
            assert decomposable_from_filtration(F) == skel


def test_clique_separator_trace_matches_table():
    F = build_filtration(fixtures.TRACE_VERTICES, NerveClass("cech", 2), 2, 0.25)
    rows = clique_separator_trace(F)
    assert len(rows) == 8
    got = [(factorization_string(r.cliques), factorization_string(r.separators) if r.separators else "-",
            None if r.edge is None else (r.edge[0] + 1, r.edge[1] + 1), r.accepted) for r in rows]
    assert got == [
        ("[1][2][3][4][5]", "-", None, None),
        ("[1,3][2][4][5]", "-", (1, 3), True),
        ("[1,3][2][4,5]", "-", (4, 5), True),
        ("[1,3][2,5][4,5]", "[5]", (2, 5), True),
        ("[1,3][2,4,5]", "-", (2, 4), True),
        ("[1,3][2,4,5][3,4]", "[3][4]", (3, 4), True),
        ("[1,3][2,4,5][3,4]", "[3][4]", (1, 2), False),
        ("[1,3,4][2,4,5]", "[4]", (1, 4), True),
    ]


def test_single_edge_trace():
    F = build_filtration([[0, 0], [0.1, 0]], NerveClass("cech", 2))
    rows = clique_separator_trace(F)
    assert len(rows) == 2 and rows[1].accepted


def test_square_trace_accepts_chord_after_rejection():
    # near-square: sides arrive first, then the two diagonals
    P = np.array([[0, 0], [1, 0], [1, 1.01], [0, 1.02]])
    rows = clique_separator_trace(build_filtration(P, NerveClass("cech", 2), 2))[1:]
    sides = [r for r in rows if r.edge in {(0, 1), (1, 2), (2, 3), (0, 3)}]
    assert [r.accepted for r in sides] == [True, True, True, False]
    diagonals = [r for r in rows if r.edge in {(0, 2), (1, 3)}]
    assert all(r.accepted for r in diagonals)
    assert is_decomposable(graph_from_blocks(4, rows[-1].cliques))


def test_factorization_string_round_trip():
    rng = np.random.default_rng(7)
    for _ in range(50):
        blocks = sorted({tuple(sorted(rng.choice(9, size=int(rng.integers(1, 4)), replace=False).tolist()))
                         for _ in range(4)})
        assert parse_factorization(factorization_string(blocks)) == blocks
    with pytest.raises(ValueError):
        parse_factorization("1,2]")
