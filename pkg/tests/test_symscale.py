"""Symmetric O(N) GHZ purification engine versus the 2^N and dense oracles."""

import numpy as np
import pytest

from mbpure.dense import apply_pauli_channel, embed_unitary
from mbpure.diagonal import (
    DiagonalState,
    apply_local_channel,
    depolarize_to_diagonal,
)
from mbpure.epp import EppSchedule, fixed_point, p_step
from mbpure.graphs import color, star_graph
from mbpure.noise import GATE_MATRICES, GateNoiseModel, PauliChannel
from mbpure.symscale import (
    NotDistillableError,
    SymmetricCoefficients,
    binom_weights,
    distillable,
    encoded_fidelity_curve,
    noisy_purify_fixed_point,
    noisy_step,
    prep_threshold,
    prepare_initial_ghz,
    purify_step,
    scaling_threshold,
    sigx_on_A,
    sigz_on_B,
)


def _random_symmetric(n_b, rng):
    c = np.sort(rng.dirichlet(np.ones(n_b + 1)))[::-1]
    c = c / (binom_weights(n_b) @ c)
    return SymmetricCoefficients(c)


def test_pure_round_trip_and_fidelity():
    c = SymmetricCoefficients.pure(3)
    assert c.fidelity == 1.0
    s = c.to_diagonal()
    assert s.graph == star_graph(4)
    back = SymmetricCoefficients.from_diagonal(s)
    assert np.max(np.abs(back.c - c.c)) < 1e-15


def test_sigz_on_legs_matches_diagonal_engine(rng):
    n_b = 4
    c = _random_symmetric(n_b, rng)
    p = 0.87
    fast = sigz_on_B(c, p)
    s = c.to_diagonal()
    for leg in range(2, n_b + 2):
        s = apply_local_channel(s, leg, PauliChannel.phaseflip(p))
    slow = SymmetricCoefficients.from_diagonal(s)
    assert np.max(np.abs(fast.c - slow.c)) < 1e-14


def test_sigx_on_hub_matches_diagonal_engine(rng):
    n_b = 4
    c = _random_symmetric(n_b, rng)
    p = 0.83
    fast = sigx_on_A(c, p)
    s = apply_local_channel(c.to_diagonal(), 1, PauliChannel.bitflip(p))
    slow = SymmetricCoefficients.from_diagonal(s)
    assert np.max(np.abs(fast.c - slow.c)) < 1e-14


def test_noisy_step_equals_full_binary_purification_step(rng):
    n_b = 3
    c = _random_symmetric(n_b, rng)
    p = 0.93
    fast, prob = noisy_step(c, p)
    slow_state, slow_prob = p_step(
        c.to_diagonal(), color(star_graph(n_b + 1)),
        GateNoiseModel.binary(p), which="P2")
    slow = SymmetricCoefficients.from_diagonal(slow_state)
    assert abs(prob - slow_prob) < 1e-13
    assert np.max(np.abs(fast.c - slow.c)) < 1e-13


def test_fixed_point_equals_full_epp_with_squaring_schedule():
    p = 0.92
    fast = noisy_purify_fixed_point(4, p)
    res = fixed_point(GateNoiseModel.binary(p), star_graph(4),
                      schedule=EppSchedule(steps=("P2",)))
    slow = SymmetricCoefficients.from_diagonal(res.state)
    assert np.max(np.abs(fast.c - slow.c)) < 1e-10


def test_purify_step_squares_coefficients(rng):
    c = _random_symmetric(3, rng)
    out, k = purify_step(c)
    assert k == pytest.approx(float(binom_weights(3) @ (c.c ** 2)))
    assert np.max(np.abs(out.c - c.c ** 2 / k)) < 1e-15


def test_prepare_initial_ghz_matches_dense_chain_oracle():
    n = 4
    p = 0.9
    d = 1 << n
    vec = np.zeros(d, dtype=complex)
    vec[0] = vec[1] = 1.0 / np.sqrt(2.0)  # |+> on qubit 1, |0..0> elsewhere
    rho = np.outer(vec, vec.conj())
    ch = PauliChannel.bitflip(p)
    for q in range(1, n):
        rho = apply_pauli_channel(rho, ch, q, n)
        rho = apply_pauli_channel(rho, ch, q + 1, n)
        full = embed_unitary(GATE_MATRICES["CNOT"], (q, q + 1), n)
        rho = full @ rho @ full.conj().T
    for leg in range(2, n + 1):  # rotate GHZ frame to the star graph basis
        full = embed_unitary(GATE_MATRICES["H"], (leg,), n)
        rho = full @ rho @ full.conj().T
    s = depolarize_to_diagonal(rho, star_graph(n))
    # no hub deviation is ever produced by the bit-flip chain
    hub = np.arange(d) & 1
    assert np.max(s.coeffs[hub == 1]) < 1e-14
    # weight-class averaging over leg patterns is the symmetrization
    legs = (np.arange(d) >> 1)
    weight = np.array([bin(x).count("1") for x in legs])
    slow = np.array([s.coeffs[weight == k].sum() for k in range(n)])
    slow /= binom_weights(n - 1)
    fast = prepare_initial_ghz(n, p)
    assert np.max(np.abs(fast.c - slow)) < 1e-14


def test_distillability_threshold_behaviour():
    with pytest.raises(NotDistillableError):
        noisy_purify_fixed_point(4, 0.8)
    good = noisy_purify_fixed_point(4, 0.95)
    assert good.fidelity > 0.9
    assert distillable(prepare_initial_ghz(4, 0.95), 0.95)
    assert not distillable(prepare_initial_ghz(4, 0.8), 0.8)
    thr = prep_threshold(4)
    assert 0.8 < thr < 0.9


def test_encoded_fidelity_matches_majority_vote_closed_form():
    qs, f = encoded_fidelity_curve(SymmetricCoefficients.pure(3))
    expected = qs ** 3 + 3 * qs ** 2 * (1 - qs)
    assert np.max(np.abs(f - expected)) < 1e-12
    # endpoints: random channel gives 1/2, perfect channel gives 1
    assert f[0] == pytest.approx(0.5)
    assert f[-1] == pytest.approx(1.0)


def test_encoded_fidelity_matches_communication_module():
    from mbpure.mbqec import build_resource, effective_map, repetition_code

    p = 0.94
    c = noisy_purify_fixed_point(4, p)
    qs, f = encoded_fidelity_curve(c)
    code = repetition_code(3, "phaseflip")
    res = build_resource(code, "decode",
                         ("epp", GateNoiseModel.binary(p), "P2-only"))
    for qi in (100, 500, 900):
        m = effective_map("channel+decode", code, {"decode": res},
                          PauliChannel.phaseflip(float(qs[qi])))
        # phase flips act as logical bit flips in this code's logical frame
        assert m.probs[0] + m.probs[1] == pytest.approx(1.0, abs=1e-12)
        assert m.probs[0] == pytest.approx(f[qi], abs=1e-10)


def test_scaling_thresholds_decrease():
    rows = scaling_threshold("C", [3, 5, 7])
    thr = [t for _, _, t in rows]
    assert thr[0] > thr[1] > thr[2]
    assert all(0.7 < t < 0.9 for t in thr)


def test_symmetric_validation():
    with pytest.raises(ValueError):
        SymmetricCoefficients(np.array([0.5, 0.1]))  # not normalized
    lam = np.zeros(8)
    lam[0], lam[2], lam[4], lam[6] = 0.7, 0.2, 0.05, 0.05
    s = DiagonalState(star_graph(3), lam)
    with pytest.raises(ValueError):
        SymmetricCoefficients.from_diagonal(s)  # asymmetric leg weights
