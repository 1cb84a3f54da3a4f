import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from allconcur.overlay import (
    Digraph,
    GraphError,
    brute_force_connectivity,
    complete_digraph,
    diameter,
    fault_diameter,
    has_path,
    make_circulant,
    parse_graph,
    predecessors,
    successors,
    vertex_connectivity,
)
from oracles import bfs_diameter, min_node_cut


def test_successors_examples():
    assert successors(complete_digraph(3), 0) == {1, 2}
    assert successors(make_circulant(4, [1, 2]), 0) == {1, 2}
    assert successors(Digraph.from_edges(1, []), 0) == set()
    with pytest.raises(GraphError):
        successors(complete_digraph(3), 7)


def test_predecessors():
    assert predecessors(make_circulant(9, [4, 5, 8]), 6) == {1, 2, 7}


def test_circulant_shapes():
    c4 = make_circulant(4, [1, 2])
    assert len(c4.edges) == 8 and all(c4.out_degree(p) == 2 for p in range(4))
    c9 = make_circulant(9, [1, 2, 4])
    assert len(c9.edges) == 27 and all(c9.out_degree(p) == 3 for p in range(9))
    assert make_circulant(3, [1, 2]) == complete_digraph(3)


@pytest.mark.parametrize("offsets", [[0], [4], [], [-1]])
def test_circulant_rejects_bad_offsets(offsets):
    with pytest.raises(GraphError):
        make_circulant(4, offsets)


@given(st.integers(2, 12), st.data())
def test_circulant_is_regular(n, data):
    offsets = data.draw(st.sets(st.integers(1, n - 1), min_size=1))
    G = make_circulant(n, offsets)
    assert all(G.out_degree(p) == len(offsets) for p in range(n))


# values produced once by oracles.min_node_cut and frozen here
@pytest.mark.parametrize(
    "G, kappa",
    [
        (complete_digraph(3), 2),
        (complete_digraph(5), 4),
        (make_circulant(5, [1]), 1),
        (make_circulant(4, [1, 2]), 2),
        (make_circulant(9, [1, 2, 4]), 3),
        (make_circulant(9, [4, 5, 8]), 3),
        (make_circulant(8, [1, 3]), 2),
    ],
)
def test_vertex_connectivity_frozen(G, kappa):
    assert vertex_connectivity(G) == kappa
    assert min_node_cut(G.n, G.edges) == kappa


def test_vertex_connectivity_needs_two_nodes():
    with pytest.raises(GraphError):
        vertex_connectivity(Digraph.from_edges(1, []))


def _random_digraph(rng, n):
    p = rng.random()
    return Digraph.from_edges(n, [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < p])


def test_connectivity_matches_cut_enumeration():
    rng = random.Random(11)
    for _ in range(200):
        G = _random_digraph(rng, rng.randint(2, 7))
        assert vertex_connectivity(G) == min_node_cut(G.n, G.edges)
        assert brute_force_connectivity(G) == min_node_cut(G.n, G.edges)


def test_has_path():
    G = make_circulant(3, [1])
    assert has_path(G, 0, 2) and has_path(G, 1, 1)
    assert not has_path(Digraph.from_edges(2, []), 0, 1)


def test_fault_diameter_examples():
    assert fault_diameter(complete_digraph(4), 1) == 1
    assert fault_diameter(make_circulant(4, [1, 2]), 1) == 2
    G = make_circulant(9, [1, 2, 4])
    assert fault_diameter(G, 0) == diameter(G) == bfs_diameter(9, G.edges) == 3
    assert fault_diameter(G, 2) == 4
    with pytest.raises(GraphError):
        fault_diameter(make_circulant(5, [1]), 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 7), st.integers(0, 10**6))
def test_fault_diameter_matches_enumeration(n, seed):
    from itertools import combinations

    rng = random.Random(seed)
    G = make_circulant(n, rng.sample(range(1, n), rng.randint(2, n - 1)))
    f = vertex_connectivity(G) - 1
    expected = max(bfs_diameter(n, G.edges, frozenset(R)) for R in combinations(range(n), f))
    assert fault_diameter(G, f) == expected


def test_parse_graph_formats():
    assert parse_graph({"circulant": {"n": 9, "offsets": [1, 2, 4]}}) == make_circulant(9, [1, 2, 4])
    G = parse_graph({"nodes": 2, "edges": [[0, 1], [1, 0]]})
    assert G == complete_digraph(2)
    assert parse_graph(G.to_dict()) == G
    for bad in ({}, {"nodes": 2, "edges": [[0, 5]]}, {"circulant": {"n": 3}}, {"nodes": 0}):
        with pytest.raises(GraphError):
            parse_graph(bad)
