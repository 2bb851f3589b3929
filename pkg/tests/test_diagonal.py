"""Graph-diagonal state engine versus the dense computational-basis oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbpure.dense import apply_pauli_channel
from mbpure.diagonal import (
    DiagonalState,
    JointDiagonalState,
    apply_channel_everywhere,
    apply_local_channel,
    depolarize_to_diagonal,
    diagonal_to_dense,
    fidelity_diagonal,
    fidelity_to_pure,
    state_from_json,
    state_to_json,
)
from mbpure.graphs import line_graph, ring_graph, star_graph
from mbpure.noise import PauliChannel

from conftest import random_connected_graph


def test_pure_state_and_validation():
    g = star_graph(3)
    s = DiagonalState.pure(g)
    assert s.coeffs[0] == 1.0 and s.coeffs[1:].sum() == 0.0
    with pytest.raises(ValueError):
        DiagonalState(g, np.ones(8))  # not normalized
    with pytest.raises(ValueError):
        DiagonalState(g, np.full(4, 0.25))  # wrong length


def test_local_channel_matches_dense_oracle(rng):
    for g in (star_graph(3), line_graph(4), ring_graph(4)):
        lam = rng.dirichlet(np.ones(1 << g.n))
        s = DiagonalState(g, lam)
        for q in range(1, g.n + 1):
            probs = rng.dirichlet(np.ones(4))
            ch = PauliChannel(tuple(probs))
            fast = apply_local_channel(s, q, ch)
            dense = apply_pauli_channel(diagonal_to_dense(s), ch, q, g.n)
            back = depolarize_to_diagonal(dense, g)
            assert np.max(np.abs(fast.coeffs - back.coeffs)) < 1e-12


def test_depolarize_inverts_diagonal_to_dense(rng):
    g = random_connected_graph(4, rng)
    s = DiagonalState(g, rng.dirichlet(np.ones(16)))
    assert np.max(np.abs(depolarize_to_diagonal(
        diagonal_to_dense(s), g).coeffs - s.coeffs)) < 1e-12


def test_fidelity_conventions(rng):
    g = star_graph(3)
    a = DiagonalState(g, rng.dirichlet(np.ones(8)))
    b = DiagonalState(g, rng.dirichlet(np.ones(8)))
    fab = fidelity_diagonal(a, b)
    assert fab == pytest.approx(fidelity_diagonal(b, a))
    assert 0.0 < fab < 1.0
    assert fidelity_diagonal(a, a) == pytest.approx(1.0)
    # against the pure graph state: F = sqrt(lambda_0)
    assert fidelity_to_pure(a) == pytest.approx(np.sqrt(a.coeffs[0]))
    assert fidelity_diagonal(a, DiagonalState.pure(g)) == pytest.approx(
        fidelity_to_pure(a))


def test_json_round_trip(rng):
    g = line_graph(4)
    s = DiagonalState(g, rng.dirichlet(np.ones(16)))
    t = state_from_json(state_to_json(s))
    assert t.graph == g
    assert np.array_equal(t.coeffs, s.coeffs)
    assert "bit" in state_to_json(s)  # bit-order convention documented


def test_joint_product_state(rng):
    g = star_graph(2)
    a = DiagonalState(g, rng.dirichlet(np.ones(4)))
    j = JointDiagonalState.product(a, a)
    assert j.coeffs.shape == (4, 4)
    assert j.coeffs.sum() == pytest.approx(1.0)
    assert np.allclose(j.coeffs, np.outer(a.coeffs, a.coeffs))


@settings(max_examples=40, deadline=None)
@given(
    weights=st.lists(st.floats(0.01, 1.0), min_size=8, max_size=8),
    chan=st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(
        lambda v: sum(v) > 1e-6),
    q=st.integers(1, 3),
)
def test_channels_preserve_probability_simplex(weights, chan, q):
    g = line_graph(3)
    lam = np.array(weights) / np.sum(weights)
    probs = tuple(np.array(chan) / np.sum(chan))
    out = apply_local_channel(DiagonalState(g, lam), q, PauliChannel(probs))
    assert np.all(out.coeffs >= -1e-15)
    assert out.coeffs.sum() == pytest.approx(1.0)


def test_channel_everywhere_equals_sequential(rng):
    g = star_graph(4)
    s = DiagonalState(g, rng.dirichlet(np.ones(16)))
    ch = PauliChannel.depolarizing(0.85)
    everywhere = apply_channel_everywhere(s, ch)
    seq = s
    for q in range(1, 5):
        seq = apply_local_channel(seq, q, ch)
    assert np.max(np.abs(everywhere.coeffs - seq.coeffs)) < 1e-14
