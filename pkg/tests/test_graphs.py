"""Graph catalog, coloring, Pauli label algebra, and graph-basis states."""

import numpy as np
import pytest

from mbpure.graphs import (
    Graph,
    PauliString,
    color,
    correlation_operator,
    graph_basis_state_dense,
    graph_from_name,
    graph_state_dense,
    lc_transform_index,
    line_graph,
    local_complement,
    pauli_index_action,
    ring_graph,
    star_graph,
    three_colorable_resource_graph,
    cluster_ring_resource_graph,
)

from conftest import random_connected_graph


def test_catalog_shapes():
    assert len(star_graph(5).edges) == 4
    assert len(ring_graph(5).edges) == 5
    assert len(line_graph(4).edges) == 3
    assert cluster_ring_resource_graph().n == 6
    assert three_colorable_resource_graph().n == 6
    assert graph_from_name("star:4") == star_graph(4)
    assert graph_from_name("three-colorable-resource") == \
        three_colorable_resource_graph()


def test_edge_list_round_trip():
    g = three_colorable_resource_graph()
    assert Graph.from_edge_list_text(g.to_edge_list_text()) == g


def test_star_coloring_hub_is_class_zero():
    c = color(star_graph(4))
    assert c.is_two_colorable
    assert c.class_vertices(0) == (1,)
    assert c.class_vertices(1) == (2, 3, 4)
    assert c.class_mask(0) == 0b0001
    assert c.class_mask(1) == 0b1110


def test_odd_ring_needs_three_colors():
    c = color(ring_graph(5))
    assert not c.is_two_colorable
    assert c.k == 3
    # proper coloring
    g = ring_graph(5)
    for a, b in g.edges:
        assert c.colors[a - 1] != c.colors[b - 1]


def test_graph_state_is_stabilizer_eigenvector():
    for g in (star_graph(3), line_graph(4), ring_graph(4)):
        vec = graph_state_dense(g)
        for v in range(1, g.n + 1):
            k = correlation_operator(g, v).matrix()
            assert np.allclose(k @ vec, vec, atol=1e-12)


def test_graph_basis_orthonormal():
    g = line_graph(3)
    basis = np.stack([graph_basis_state_dense(g, mu) for mu in range(8)])
    gram = basis.conj() @ basis.T
    assert np.allclose(gram, np.eye(8), atol=1e-12)


def test_pauli_index_action_matches_dense():
    g = line_graph(3)
    for v in range(1, 4):
        for letter in "XYZ":
            p = PauliString.single(g.n, v, letter)
            shift = pauli_index_action(p, g)
            for mu in (0, 3, 5):
                moved = p.matrix() @ graph_basis_state_dense(g, mu)
                target = graph_basis_state_dense(g, mu ^ shift)
                overlap = abs(np.vdot(target, moved))
                assert overlap == pytest.approx(1.0, abs=1e-12)


def test_pauli_string_algebra():
    a = PauliString.from_letters("XZI")
    b = PauliString.from_letters("ZXY")
    assert (a * b).letters == "YYY"
    assert a.weight == 2
    assert PauliString.single(3, 2, "Y").letters == "IYI"


def test_local_complement_line_to_triangle():
    g = line_graph(3)
    lc = local_complement(g, 2)
    assert lc.has_edge(1, 3)
    assert local_complement(lc, 2) == g


def test_lc_index_transform_is_involutive_bijection():
    g = three_colorable_resource_graph()
    a = 1
    g2 = local_complement(g, a)
    fwd = np.array([lc_transform_index(mu, g, a) for mu in range(64)])
    assert sorted(fwd.tolist()) == list(range(64))
    back = np.array([lc_transform_index(int(m), g2, a) for m in fwd])
    assert np.array_equal(back, np.arange(64))
    assert fwd[0] == 0


def test_ring_hub_and_three_colorable_are_lc_related():
    # local complementation at ring vertex 1 links the two resource graphs
    g = cluster_ring_resource_graph()
    assert local_complement(g, 1) == three_colorable_resource_graph()


def test_random_connected_graph_helper(rng):
    for n in range(2, 7):
        g = random_connected_graph(n, rng)
        c = color(g)  # BFS coloring requires connectivity
        assert c.n == n
