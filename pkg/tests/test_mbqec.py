"""Measurement-based encoded communication: codes, decoding, baselines."""

import dataclasses

import numpy as np
import pytest

from mbpure.epp import fixed_point
from mbpure.graphs import three_colorable_resource_graph
from mbpure.mbqec import (
    AmbiguousPatternError,
    advantage_threshold,
    build_resource,
    cluster_ring_code,
    code_by_name,
    derive_correction_table,
    effective_map,
    jamiolkowski_fidelity,
    region_scan,
    repetition_code,
    table_rows,
)
from mbpure.noise import GateNoiseModel, PauliChannel

ALL_CODES = [
    repetition_code(3, "bitflip"),
    repetition_code(3, "phaseflip"),
    cluster_ring_code(),
]


def test_code_catalog():
    assert code_by_name("repetition3").n == 3
    assert code_by_name("repetition-phaseflip-5").n == 5
    assert code_by_name("cluster-ring").n == 5
    with pytest.raises(ValueError):
        code_by_name("nonsense")


def test_bitflip_pattern_table_spot_checks():
    rows = dict(table_rows(repetition_code(3, "bitflip"), class_index=0))
    assert len(rows) == 16
    assert rows["III"] == "I"
    assert rows["ZZI"] == "I"
    assert rows["ZII"] == "Z"
    assert rows["ZZZ"] == "Z"
    assert rows["XXX"] == "X"
    assert rows["YXX"] == "Y"


def test_phaseflip_table_is_the_hadamard_rotated_bitflip_table():
    # outcome letters swap X <-> Z under the per-leg Hadamard; the logical
    # correction labels are frame-independent and stay put
    bit = dict(table_rows(repetition_code(3, "bitflip"), class_index=0))
    phase = dict(table_rows(repetition_code(3, "phaseflip"), class_index=0))
    swap = str.maketrans("XZ", "ZX")
    assert {p.translate(swap): c for p, c in bit.items()} == phase


@pytest.mark.parametrize("code", ALL_CODES, ids=lambda c: c.name)
def test_correction_table_partitions_outcomes(code):
    t = derive_correction_table(code)
    assert t.complete
    size = 4 ** code.n
    assert t.klass.shape == (size,)
    assert np.all(t.klass >= 0)
    counts = np.bincount(t.klass)
    assert counts.size == len(code.correctable)
    assert np.all(counts == counts[0])  # equal-size cosets


def test_channel_decode_matches_hand_enumeration():
    # three-qubit phase-flip repetition code under white noise D_w(0.9):
    # exhaustive enumeration over the 64 physical error patterns gives this
    # effective channel (I, X, Y, Z)
    code = repetition_code(3, "phaseflip")
    m = effective_map("channel+decode", code,
                      {"decode": build_resource(code, "decode", ("perfect",))},
                      PauliChannel.depolarizing(0.9))
    expected = (0.860875, 0.003625, 0.003625, 0.131875)
    assert np.max(np.abs(np.array(m.probs) - expected)) < 1e-12


@pytest.mark.parametrize("code", ALL_CODES, ids=lambda c: c.name)
@pytest.mark.parametrize("chan", [
    PauliChannel.depolarizing(0.88),
    PauliChannel.phaseflip(0.8),
    PauliChannel((0.85, 0.07, 0.03, 0.05)),
])
def test_gate_based_baseline_agrees_with_perfect_resources(code, chan):
    resources = {"decode": build_resource(code, "decode", ("perfect",)),
                 "encode": build_resource(code, "encode", ("perfect",))}
    for scenario in ("channel+decode", "encode+channel+decode"):
        mb = effective_map(scenario, code, resources, chan)
        gate = effective_map(scenario, code, None, chan,
                             decode_impl="gate-based",
                             gate_model=GateNoiseModel.perfect())
        assert np.max(np.abs(np.array(mb.probs) - gate.probs)) < 1e-12


def test_perfect_encode_stage_is_transparent():
    code = repetition_code(3, "phaseflip")
    resources = {"decode": build_resource(code, "decode", ("perfect",)),
                 "encode": build_resource(code, "encode", ("perfect",))}
    chan = PauliChannel.depolarizing(0.9)
    a = effective_map("channel+decode", code, resources, chan)
    b = effective_map("encode+channel+decode", code, resources, chan)
    assert np.max(np.abs(np.array(a.probs) - b.probs)) < 1e-12


def test_effective_map_is_a_channel():
    code = cluster_ring_code()
    res = {"decode": build_resource(
        code, "decode", ("epp", GateNoiseModel.depolarizing(0.97)))}
    m = effective_map("channel+decode", code, res, PauliChannel.depolarizing(0.9))
    assert sum(m.probs) == pytest.approx(1.0, abs=1e-12)
    assert all(p >= -1e-14 for p in m.probs)
    choi = m.choi()
    assert np.trace(choi).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(choi).min() > -1e-12
    assert jamiolkowski_fidelity(m) == m.probs[0]


def test_unencoded_scenario_returns_channel_itself():
    ch = PauliChannel((0.8, 0.1, 0.04, 0.06))
    m = effective_map("unencoded", channel=ch)
    assert m.probs == ch.probs


def test_repetition_advantage_threshold_is_half():
    code = repetition_code(3, "bitflip")
    res = {"decode": build_resource(code, "decode", ("perfect",))}
    thr = advantage_threshold(code, "bitflip", res, lo=0.3, hi=0.8)
    assert thr == pytest.approx(0.5, abs=1e-3)


def test_binary_resources_need_the_squaring_only_schedule():
    # alternating P1/P2 destroys binary-restricted fixed points (the P1 step
    # convolves leg deviations); the squaring-only schedule purifies them
    code = repetition_code(3, "phaseflip")
    model = GateNoiseModel.binary(0.92)
    good = build_resource(code, "decode", ("epp", model, "P2-only"))
    bad = build_resource(code, "decode", ("epp", model, "P1"))
    assert good.state.coeffs[0] > 0.85
    assert bad.state.coeffs[0] < 0.2


def test_cluster_ring_epp_resource_uses_the_three_colorable_fixed_point():
    model = GateNoiseModel.depolarizing(0.97)
    res = build_resource(cluster_ring_code(), "decode", ("epp", model))
    direct = fixed_point(model, three_colorable_resource_graph())
    # the index relabeling between the two graphs fixes the zero pattern
    assert res.state.coeffs[0] == pytest.approx(
        float(direct.state.coeffs[0]), abs=1e-12)
    assert sorted(res.state.coeffs) == pytest.approx(
        sorted(direct.state.coeffs))


def test_region_scan_rows_and_unencoded_reference():
    code = repetition_code(3, "phaseflip")
    rows = region_scan(code, [0.95], [0.7, 0.9],
                       approaches=("epp", "unencoded"))
    assert len(rows) == 4
    for p, q, approach, fid, beats in rows:
        assert p == 0.95 and q in (0.7, 0.9)
        if approach == "unencoded":
            assert fid == pytest.approx(q)
            assert beats is False


def test_ambiguous_error_family_is_rejected():
    code = repetition_code(3, "bitflip")
    # X1 X2 shares its syndrome with the already-correctable X3
    x1x2 = 0b000101
    clash = dataclasses.replace(code, correctable=code.correctable + (x1x2,))
    with pytest.raises(AmbiguousPatternError):
        derive_correction_table(clash)
