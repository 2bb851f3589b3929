"""GHZ noise localization: twirl, standard form, and mixing feasibility."""

import numpy as np
import pytest

from mbpure.diagonal import DiagonalState, apply_local_channel
from mbpure.graphs import star_graph
from mbpure.localfit import fit_closest_local
from mbpure.localize import (
    _local_profile,
    localize_noise,
    localize_state,
    twirl_to_standard_form,
)
from mbpure.noise import PauliChannel
from mbpure.symscale import noisy_purify_fixed_point


def _noisy_ghz(n, rng):
    s = DiagonalState.pure(star_graph(n))
    for q in range(1, n + 1):
        probs = np.array([6.0, 1.0, 1.0, 1.0]) + rng.random(4)
        s = apply_local_channel(s, q, PauliChannel(tuple(probs / probs.sum())))
    return s


def test_twirl_preserves_fidelity_and_symmetrizes(rng):
    s = _noisy_ghz(4, rng)
    sf = twirl_to_standard_form(s)
    # the zero-pattern coefficients (and hence lambda0+) are untouched
    assert sf.lam0_plus == pytest.approx(float(s.coeffs[0]), abs=1e-12)
    assert sf.fidelity == sf.lam0_plus
    total = sf.lam0_plus + sf.lam0_minus + 2.0 * sf.lam.sum()
    assert total == pytest.approx(1.0, abs=1e-9)
    assert sf.lam[0] == 0.0
    assert np.all(sf.lam >= -1e-15)


def test_localization_feasible_and_cheap_at_high_fidelity():
    s = noisy_purify_fixed_point(4, 0.97).to_diagonal()
    out, report = localize_state(s)
    assert report.feasible
    assert 0.0 < report.Q <= 1.0
    assert report.fidelity_after <= report.fidelity_before + 1e-12
    assert report.relative_reduction < 0.05
    # the localized state is exactly a per-qubit Pauli noise state
    fit = fit_closest_local(out, symmetry=(0, 1, 1, 1), seed=2)
    assert fit.one_minus_F <= 1e-9


def test_localization_weight_is_the_feasibility_optimum():
    s = noisy_purify_fixed_point(4, 0.95).to_diagonal()
    sf = twirl_to_standard_form(s)
    out, report = localize_noise(sf)
    # brute-force check: at the chosen retention p, Q is the largest weight
    # keeping every mixing probability l_k - Q * lam~_k nonnegative, and no
    # grid point p does materially better
    m = sf.n - 1
    weights = np.array([bin(x).count("1") for x in range(1 << m)])
    lam_tilde = 2.0 * sf.lam
    lam_tilde[0] = sf.lam0_plus + sf.lam0_minus

    def q_of(p):
        prof = _local_profile(weights, m, p)
        return float(np.min(prof[lam_tilde > 0] / lam_tilde[lam_tilde > 0]))

    assert report.Q == pytest.approx(min(q_of(report.p), 1.0), abs=1e-12)
    brute = max(q_of(p) for p in np.linspace(0.5, 1.0, 4001))
    assert report.Q >= min(brute, 1.0) - 1e-6
    assert np.all(report.q >= -1e-12)


def test_localized_output_matches_report_fidelity():
    s = noisy_purify_fixed_point(4, 0.96).to_diagonal()
    out, report = localize_state(s)
    assert float(out.coeffs[0]) == pytest.approx(report.fidelity_after, abs=1e-9)
    assert out.coeffs.sum() == pytest.approx(1.0)


def test_localize_across_sizes():
    for n, p in ((4, 0.95), (6, 0.96)):
        s = noisy_purify_fixed_point(n, p).to_diagonal()
        out, report = localize_state(s)
        assert report.feasible
        assert report.fidelity_after > 0.7


def test_localize_rejects_non_star_graphs():
    from mbpure.graphs import line_graph

    with pytest.raises(ValueError):
        localize_state(DiagonalState.pure(line_graph(4)))
