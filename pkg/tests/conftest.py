"""Shared oracle helpers for the test suite.

The oracles here are independent dense-matrix implementations (computational
basis, gate-by-gate) used to validate the diagonal / symmetric engines.
"""

from __future__ import annotations

import numpy as np
import pytest

from mbpure.dense import apply_pauli_channel, embed_unitary
from mbpure.graphs import Graph, graph_basis_state_dense
from mbpure.noise import GATE_MATRICES


def random_connected_graph(n: int, rng: np.random.Generator) -> Graph:
    """Random connected graph: spanning tree plus extra edges."""
    edges = set()
    order = list(rng.permutation(np.arange(1, n + 1)))
    for i in range(1, n):
        a = order[i]
        b = order[int(rng.integers(0, i))]
        edges.add((min(a, b), max(a, b)))
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            if rng.random() < 0.3:
                edges.add((a, b))
    return Graph(n, frozenset(edges))


def graph_basis_density(graph: Graph, coeffs: np.ndarray) -> np.ndarray:
    """Dense density matrix of a graph-diagonal state."""
    rho = np.zeros((1 << graph.n, 1 << graph.n), dtype=complex)
    for mu, lam in enumerate(coeffs):
        if lam:
            b = graph_basis_state_dense(graph, mu)
            rho += lam * np.outer(b, b.conj())
    return rho


def dense_purification_oracle(state, coloring, model, which):
    """Gate-by-gate dense simulation of one two-copy purification step.

    Copy 1 occupies qubits 1..n (low bits), copy 2 qubits n+1..2n.  For the
    selected color class the CNOT runs copy2 -> copy1, for the complement
    copy1 -> copy2; each gate's single-qubit channels hit both its qubits
    immediately before the perfect gate (interleaved, not batched).  Copy 2
    is postselected on the no-deviation subspace of the selected class and
    traced out.  Returns (coefficient vector, success probability,
    largest graph-basis off-diagonal magnitude).
    """
    g = state.graph
    n, d = g.n, 1 << g.n
    basis = [graph_basis_state_dense(g, mu) for mu in range(d)]
    rho1 = graph_basis_density(g, state.coeffs)
    rho = np.kron(rho1, rho1)
    sel = coloring.class_mask(0 if which == "P1" else 1)
    cnot = GATE_MATRICES["CNOT"]
    for v in range(1, n + 1):
        if model is not None and not model.is_perfect:
            ch = model.qubit_channel(coloring.colors[v - 1])
            rho = apply_pauli_channel(rho, ch, v, 2 * n)
            rho = apply_pauli_channel(rho, ch, n + v, 2 * n)
        pair = (n + v, v) if (sel >> (v - 1)) & 1 else (v, n + v)
        full = embed_unitary(cnot, pair, 2 * n)
        rho = full @ rho @ full.conj().T
    proj = np.zeros((d, d), dtype=complex)
    for nu in range(d):
        if (nu & sel) == 0:
            proj += np.outer(basis[nu], basis[nu].conj())
    pf = embed_unitary(proj, tuple(range(n + 1, 2 * n + 1)), 2 * n)
    rho = pf @ rho @ pf.conj().T
    prob = float(np.trace(rho).real)
    reduced = np.einsum("aiaj->ij", rho.reshape(d, d, d, d)) / prob
    lam = np.array([(b.conj() @ reduced @ b).real for b in basis])
    off = max(abs(basis[a].conj() @ reduced @ basis[b])
              for a in range(d) for b in range(d) if a != b)
    return lam, prob, off


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
