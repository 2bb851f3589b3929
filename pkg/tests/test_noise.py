"""Pauli channels, gate noise models, and Clifford conjugation."""

import numpy as np
import pytest

from mbpure.diagonal import DiagonalState, depolarize_to_diagonal, diagonal_to_dense
from mbpure.graphs import PauliString, star_graph
from mbpure.noise import (
    GateNoiseModel,
    GlobalDepolarizing,
    PauliChannel,
    TwoQubitPauliChannel,
    conjugate_pauli_through_clifford,
    make_channel,
    noisy_cnot_mixture,
)


def test_channel_prob_order_and_factories():
    assert PauliChannel.identity().probs == (1.0, 0.0, 0.0, 0.0)
    assert PauliChannel.bitflip(0.9).probs == pytest.approx((0.9, 0.1, 0.0, 0.0))
    assert PauliChannel.phaseflip(0.9).probs == pytest.approx((0.9, 0.0, 0.0, 0.1))
    w = PauliChannel.depolarizing(0.8)
    assert w.probs[0] == pytest.approx(0.8 + 0.2 / 4)
    assert w.probs[1] == w.probs[2] == w.probs[3] == pytest.approx(0.05)
    assert sum(w.probs) == pytest.approx(1.0)


def test_channel_validation():
    with pytest.raises(ValueError):
        PauliChannel((0.5, 0.5, 0.5, -0.5))
    with pytest.raises(ValueError):
        PauliChannel.bitflip(1.5)
    with pytest.raises(ValueError):
        make_channel("nonsense", 0.9)


def test_gate_model_color_channels():
    binary = GateNoiseModel.binary(0.92)
    assert binary.qubit_channel(0).probs == PauliChannel.bitflip(0.92).probs
    assert binary.qubit_channel(1).probs == PauliChannel.phaseflip(0.92).probs
    dep = GateNoiseModel.depolarizing(0.95)
    assert dep.qubit_channel(0).probs == dep.qubit_channel(3).probs
    assert GateNoiseModel.perfect().is_perfect


def test_two_qubit_channel_normalization():
    ch = TwoQubitPauliChannel.correlated_depolarizing(0.9)
    assert np.asarray(ch.probs).sum() == pytest.approx(1.0)
    mix = noisy_cnot_mixture(GateNoiseModel.correlated(0.9), 1, 2, 3)
    weights = [w for w, _ in mix]
    assert sum(weights) == pytest.approx(1.0)
    assert all(isinstance(p, PauliString) for _, p in mix)


def test_global_depolarizing_dense_matches_diagonal(rng):
    g = star_graph(3)
    lam = rng.dirichlet(np.ones(8))
    s = DiagonalState(g, lam)
    glob = GlobalDepolarizing(0.7, 3)
    via_diag = glob.apply_diagonal(s.coeffs)
    via_dense = depolarize_to_diagonal(glob.apply_dense(diagonal_to_dense(s)), g)
    assert np.max(np.abs(via_diag - via_dense.coeffs)) < 1e-12


def test_clifford_conjugation_cnot_and_h():
    x1 = PauliString.from_letters("XI")
    z2 = PauliString.from_letters("IZ")
    assert conjugate_pauli_through_clifford(x1, "CNOT", (1, 2)).letters == "XX"
    assert conjugate_pauli_through_clifford(z2, "CNOT", (1, 2)).letters == "ZZ"
    assert conjugate_pauli_through_clifford(
        PauliString.from_letters("X"), "H", (1,)).letters == "Z"
    assert conjugate_pauli_through_clifford(
        PauliString.from_letters("Y"), "H", (1,)).letters == "Y"
