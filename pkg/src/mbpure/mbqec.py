"""Measurement-based encoded communication and all comparison baselines.

A code's resource state is the Choi state of its encoding isometry: a graph
state with a read-in hub whose two hub branches carry the logical basis
states on the legs (up to a fixed local Hadamard layer for the bit-flip
repetition variant).  Encoding and decoding are Bell read-ins with
outcome-keyed Pauli corrections; because every noise source in scope is a
Pauli mixture and all gates are Clifford, the effective one-logical-qubit
map is an exactly computable Pauli channel, represented by its Choi
(Jamiolkowski) state.

Internally Pauli labels use the symplectic packing I=0, X=1, Z=2, Y=3
(bit 0 = x, bit 1 = z) so that label composition is integer XOR; outcome
strings pack one 2-bit digit per code qubit, little-endian.  Public letter
order is I, X, Y, Z.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import dense as dn
from .diagonal import DiagonalState, apply_channel_everywhere
from .epp import EppSchedule, fixed_point
from .graphs import (
    Graph,
    color as color_graph,
    graph_state_dense,
    lc_transform_index,
    star_graph,
    cluster_ring_resource_graph,
    three_colorable_resource_graph,
)
from .noise import GateNoiseModel, PauliChannel
from .tolerances import MATCH_ROOT_TOL

__all__ = [
    "Code",
    "ResourceState",
    "CorrectionTable",
    "EffectiveMap",
    "AmbiguousPatternError",
    "repetition_code",
    "cluster_ring_code",
    "derive_correction_table",
    "table_rows",
    "build_resource",
    "effective_map",
    "jamiolkowski_fidelity",
    "advantage_threshold",
    "region_scan",
    "by_fidelity_rows",
]

XZ_LETTERS = "IXZY"  # index = x-bit + 2*z-bit
LETTER_TO_XZ = {"I": 0, "X": 1, "Z": 2, "Y": 3}
_Z = 2  # xz code of a phase flip


class AmbiguousPatternError(RuntimeError):
    """Two correctable errors produce the same Bell-outcome pattern."""


def _chan_probs_xz(ch: PauliChannel) -> np.ndarray:
    pI, pX, pY, pZ = ch.probs
    return np.array([pI, pX, pZ, pY])


@functools.lru_cache(maxsize=None)
def _bell_tensor() -> np.ndarray:
    """B[i, m, l] = components of (1 ⊗ sigma_i)|Phi+> (xz label order)."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    paulis = [np.eye(2, dtype=complex), X, Z, X @ Z * 1j]  # I, X, Z, Y
    B = np.zeros((4, 2, 2), dtype=complex)
    for i, s in enumerate(paulis):
        for m in range(2):
            for l in range(2):
                B[i, m, l] = s[l, m] / math.sqrt(2.0)
    B.flags.writeable = False
    return B


@dataclass(frozen=True)
class Code:
    """Error-correcting code with its graph-state resource layout.

    ``hub`` is the read-in vertex; ``legs[i]`` is the resource vertex that
    carries code qubit ``i+1``; ``leg_hadamard`` applies H to every leg
    (bit-flip repetition variant).  ``correctable`` lists the Pauli error
    strings (xz-packed) the code corrects, identity first.
    """

    name: str
    n: int
    graph: Graph
    hub: int
    legs: tuple
    leg_hadamard: bool
    correctable: tuple

    def correctable_letters(self) -> tuple:
        return tuple(_string_letters(t, self.n) for t in self.correctable)


def _string_letters(packed: int, n: int) -> str:
    return "".join(XZ_LETTERS[(packed >> (2 * i)) & 3] for i in range(n))


def _letters_string(letters: str) -> int:
    out = 0
    for i, ch in enumerate(letters.upper()):
        out |= LETTER_TO_XZ[ch] << (2 * i)
    return out


def repetition_code(n: int = 3, kind: str = "phaseflip") -> Code:
    """Odd-distance repetition code; GHZ (star) resource state.

    ``phaseflip``: logical states |+..+>, |-..->, corrects up to (n-1)/2
    phase flips; the resource is the star graph state itself.
    ``bitflip``: conjugated by H on the legs, corrects bit flips.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError("repetition distance must be odd and >= 3")
    if kind not in ("phaseflip", "bitflip"):
        raise ValueError(f"unknown repetition kind {kind!r}")
    letter = "Z" if kind == "phaseflip" else "X"
    correctable = [0]
    for w in range(1, (n - 1) // 2 + 1):
        for combo in itertools.combinations(range(n), w):
            t = 0
            for q in combo:
                t |= LETTER_TO_XZ[letter] << (2 * q)
            correctable.append(t)
    return Code(
        name=f"repetition-{kind}-{n}",
        n=n,
        graph=star_graph(n + 1),
        hub=1,
        legs=tuple(range(2, n + 2)),
        leg_hadamard=(kind == "bitflip"),
        correctable=tuple(correctable),
    )


def cluster_ring_code() -> Code:
    """5-qubit code whose logical zero is the 5-ring graph state; corrects
    any single-qubit Pauli error."""
    correctable = [0]
    for q in range(5):
        for letter in "XYZ":
            correctable.append(LETTER_TO_XZ[letter] << (2 * q))
    return Code(
        name="cluster-ring",
        n=5,
        graph=cluster_ring_resource_graph(),
        hub=6,
        legs=(1, 2, 3, 4, 5),
        leg_hadamard=False,
        correctable=tuple(correctable),
    )


def code_by_name(name: str) -> Code:
    if name in ("repetition3", "repetition-3"):
        return repetition_code(3, "bitflip")
    if name.startswith("repetition-phaseflip-"):
        return repetition_code(int(name.rsplit("-", 1)[1]), "phaseflip")
    if name.startswith("repetition-bitflip-"):
        return repetition_code(int(name.rsplit("-", 1)[1]), "bitflip")
    if name == "cluster-ring":
        return cluster_ring_code()
    raise ValueError(f"unknown code {name!r}")


# ---------------------------------------------------------------------------
# resource / logical tensors
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _resource_tensor(code: Code) -> np.ndarray:
    """Rt[h, y]: physical resource amplitudes, hub bit h, legs packed in
    code-qubit order (bit i-1 = code qubit i)."""
    nv = code.graph.n
    vec = graph_state_dense(code.graph)
    if code.leg_hadamard:
        H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
        for leg in code.legs:
            vec = dn.embed_unitary(H, [leg], nv) @ vec
    z = np.arange(1 << nv)
    h = (z >> (code.hub - 1)) & 1
    y = np.zeros_like(z)
    for i, leg in enumerate(code.legs):
        y |= ((z >> (leg - 1)) & 1) << i
    Rt = np.zeros((2, 1 << code.n), dtype=complex)
    Rt[h, y] = vec
    Rt.flags.writeable = False
    return Rt


@functools.lru_cache(maxsize=None)
def logical_states(code: Code) -> np.ndarray:
    """V[y, b]: physical amplitudes of the logical basis states."""
    V = (math.sqrt(2.0) * _resource_tensor(code)).T.copy()
    gram = V.conj().T @ V
    if not np.allclose(gram, np.eye(2), atol=1e-10):
        raise ValueError("logical states are not orthonormal")
    V.flags.writeable = False
    return V


def _qubit_axes(arr: np.ndarray, n: int) -> np.ndarray:
    """Split the last (2^n) axis into n qubit axes ordered q1..qn."""
    lead = arr.shape[:-1]
    t = arr.reshape(lead + (2,) * n)
    k = len(lead)
    perm = list(range(k)) + list(range(k + n - 1, k - 1, -1))
    return t.transpose(perm)


# ---------------------------------------------------------------------------
# decode tables
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _decode_base(code: Code):
    """No-error read-in statistics: (prob0[O], ell[O]) over all outcomes.

    For every Bell outcome string O the post-measurement (reference, output)
    pair is a Bell state (1 ⊗ sigma_ell)|Phi+>; prob0 is its probability.
    """
    n = code.n
    B = _bell_tensor()
    Rt = _qubit_axes(_resource_tensor(code), n)           # (h, y1..yn)
    psi = _qubit_axes(logical_states(code).T / math.sqrt(2.0), n)  # (r, x1..xn)

    letters = "abcdefghijklmnopqrstuvwxyz"
    r, h = letters[0], letters[1]
    xs = letters[2:2 + n]
    ys = letters[2 + n:2 + 2 * n]
    Os = letters[2 + 2 * n:2 + 3 * n]
    sub = [r + "".join(xs), h + "".join(ys)]
    args = [psi, Rt]
    for j in range(n):
        args.append(_bell_tensor().conj())
        sub.append(Os[j] + xs[j] + ys[j])
    out_sub = r + h + "".join(reversed(Os))
    A = np.einsum(",".join(sub) + "->" + out_sub, *args)
    A = A.reshape(2, 2, 1 << (2 * n))                     # (r, h, O packed)
    ov = np.einsum("irh,rhO->Oi", _bell_tensor().conj(), A)
    probs = np.abs(ov) ** 2
    prob0 = probs.sum(axis=1)
    ell = probs.argmax(axis=1).astype(np.int8)
    # every outcome must collapse to a single Bell state
    top = probs[np.arange(probs.shape[0]), ell]
    if np.max(prob0 - top) > 1e-10:
        raise ValueError("read-in outcome is not Bell-pure")
    prob0 = prob0 / prob0.sum()
    prob0.flags.writeable = False
    ell.flags.writeable = False
    return prob0, ell


@dataclass(frozen=True)
class CorrectionTable:
    """Bell-outcome pattern -> (error class, output Pauli correction)."""

    n: int
    corrections: np.ndarray   # xz letter per outcome, -1 if uncovered
    klass: np.ndarray         # index into classes, -1 if uncovered
    classes: tuple            # xz-packed correctable error strings
    complete: bool

    def correction_letter(self, outcome_letters: str) -> str:
        o = _letters_string(outcome_letters)
        c = int(self.corrections[o])
        if c < 0:
            raise KeyError(f"outcome {outcome_letters} not covered")
        return XZ_LETTERS[c]


def derive_correction_table(code: Code) -> CorrectionTable:
    """Enumerate correctable errors against the perfect resource.

    An error E on an input qubit shifts the no-error outcome pattern by E's
    label (Bell transpose trick), so each correctable error owns the coset
    ``support0 ^ T_E``; the correction for outcome O under class E is the
    Bell label of the no-error outcome ``O ^ T_E``.
    """
    prob0, ell = _decode_base(code)
    size = prob0.size
    support0 = prob0 > 1e-12
    corrections = np.full(size, -1, dtype=np.int8)
    klass = np.full(size, -1, dtype=np.int16)
    idx = np.arange(size)
    for e_index, T in enumerate(code.correctable):
        members = idx[support0[idx ^ T]]
        clash = members[klass[members] >= 0]
        if clash.size:
            raise AmbiguousPatternError(
                f"outcome {_string_letters(int(clash[0]), code.n)} shared by "
                f"classes {klass[clash[0]]} and {e_index}"
            )
        klass[members] = e_index
        corrections[members] = ell[members ^ T]
    return CorrectionTable(
        n=code.n,
        corrections=corrections,
        klass=klass,
        classes=code.correctable,
        complete=bool((klass >= 0).all()),
    )


def table_rows(code: Code, class_index: int = 0) -> list:
    """(pattern letters, correction letter) rows of one error class."""
    t = derive_correction_table(code)
    rows = []
    for o in np.nonzero(t.klass == class_index)[0]:
        rows.append((_string_letters(int(o), code.n),
                     XZ_LETTERS[int(t.corrections[o])]))
    return rows


@functools.lru_cache(maxsize=None)
def decode_transfer(code: Code) -> np.ndarray:
    """transfer[T, i]: probability that decoding an input hit by the Pauli
    string T (xz-packed) yields net logical Pauli i after corrections."""
    prob0, ell = _decode_base(code)
    table = derive_correction_table(code)
    if not table.complete:
        raise ValueError("correction table does not cover all outcomes")
    size = prob0.size
    idx = np.arange(size)
    corr = table.corrections.astype(np.int64)
    transfer = np.empty((size, 4))
    for T in range(size):
        shifted = idx ^ T
        net = corr ^ ell[shifted].astype(np.int64)
        transfer[T] = np.bincount(net, weights=prob0[shifted], minlength=4)
    transfer.flags.writeable = False
    return transfer


# ---------------------------------------------------------------------------
# encode tables
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _logical_reps(code: Code) -> tuple:
    """Physical Pauli strings (xz-packed) acting as logical I, X, Z, Y."""
    V = logical_states(code)
    n = code.n
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    sig = [np.eye(2, dtype=complex), X, Z, X @ Z * 1j]
    reps = [0, None, None, None]
    candidates = sorted(range(1 << (2 * n)),
                        key=lambda t: bin(t).count("1"))
    for i in (1, 2, 3):
        target = V @ sig[i]
        for t in candidates:
            M = _apply_packed_pauli(V, t, n)
            c = np.vdot(target, M) / 2.0
            if abs(abs(c) - 1.0) < 1e-9 and np.allclose(M, c * target, atol=1e-9):
                reps[i] = t
                break
        if reps[i] is None:
            raise ValueError(f"no physical representative for logical {XZ_LETTERS[i]}")
    return tuple(reps)


def _apply_packed_pauli(V: np.ndarray, t: int, n: int) -> np.ndarray:
    """Apply the xz-packed Pauli string to the physical (row) index of V."""
    out = V
    for q in range(n):
        lab = (t >> (2 * q)) & 3
        if lab:
            from .graphs import PauliString

            letter = XZ_LETTERS[lab]
            m = PauliString.single(n, q + 1, letter).matrix()
            out = m @ out
    return out


@functools.lru_cache(maxsize=None)
def _encode_base(code: Code):
    """(prob_e0[beta], ell_e[beta]) of the encode read-in without errors."""
    n = code.n
    B = _bell_tensor()
    Rt = _resource_tensor(code)       # (h, y)
    V = logical_states(code)
    # A[beta, r, y] = sum_h conj(B[beta, r, h]) Rt[h, y] / sqrt(2)
    A = np.einsum("brh,hy->bry", B.conj(), Rt) / math.sqrt(2.0)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    sig = [np.eye(2, dtype=complex), X, Z, X @ Z * 1j]
    cands = np.stack([((V @ s) / math.sqrt(2.0)).T for s in sig])  # (i, r, y)
    ov = np.einsum("iry,bry->bi", cands.conj(), A)
    probs = np.abs(ov) ** 2
    prob_e0 = probs.sum(axis=1)
    ell_e = probs.argmax(axis=1).astype(np.int8)
    top = probs[np.arange(4), ell_e]
    if np.max(prob_e0 - top) > 1e-10:
        raise ValueError("encode outcome is not logically pure")
    prob_e0 = prob_e0 / prob_e0.sum()
    return prob_e0, ell_e


# ---------------------------------------------------------------------------
# resource preparation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResourceState:
    """Graph-diagonal resource for one code role."""

    state: DiagonalState
    code: Code
    role: str


def build_resource(code: Code, role: str, prep) -> ResourceState:
    """Prepare a resource: ``("perfect",)``, ``("epp", model[, final_step])``
    or ``("direct", model)`` (noisy CZ per edge).

    The EPP route for the cluster-ring code purifies the three-colorable
    graph and maps the fixed point to the ring+hub basis by the local
    complementation index permutation.
    """
    kind = prep[0]
    if kind == "perfect":
        state = DiagonalState.pure(code.graph)
    elif kind == "epp":
        model = prep[1]
        final_step = prep[2] if len(prep) > 2 else "P1"
        if code.graph == cluster_ring_resource_graph():
            g3 = three_colorable_resource_graph()
            res = fixed_point(model, g3)
            if not res.converged:
                raise RuntimeError("purification did not converge")
            lam = np.zeros_like(res.state.coeffs)
            for mu in range(lam.size):
                lam[lc_transform_index(mu, g3, 1)] = res.state.coeffs[mu]
            state = DiagonalState(code.graph, lam)
        else:
            # "P1"/"P2": alternating schedule ending with that step;
            # "P1-only"/"P2-only": single-subprotocol schedule (the
            # binary-like restricted noise family purifies with P2 alone)
            if final_step.endswith("-only"):
                schedule = EppSchedule(steps=(final_step[:2],))
            else:
                schedule = EppSchedule.alternating(final_step=final_step)
            res = fixed_point(model, code.graph, schedule=schedule)
            if not res.converged:
                raise RuntimeError("purification did not converge")
            state = res.state
    elif kind == "direct":
        model = prep[1]
        state = _direct_gates_state(code.graph, model)
    else:
        raise ValueError(f"unknown prep {kind!r}")
    return ResourceState(state=state, code=code, role=role)


def _direct_gates_state(g: Graph, model: GateNoiseModel) -> DiagonalState:
    """|+..+> followed by a noisy CZ per edge (channels by vertex color)."""
    from .diagonal import depolarize_to_diagonal

    coloring = color_graph(g)
    nv = g.n
    plus = np.full(1 << nv, 1.0 / math.sqrt(2.0) ** nv, dtype=complex)
    rho = dn.pure_state_operator(plus)
    CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    for a, b in sorted(g.edges):
        if model is not None and not model.is_perfect:
            if model.kind == "local":
                rho = dn.apply_pauli_channel(
                    rho, model.qubit_channel(coloring.colors[a - 1]), a, nv)
                rho = dn.apply_pauli_channel(
                    rho, model.qubit_channel(coloring.colors[b - 1]), b, nv)
            else:
                rho = dn.apply_two_qubit_pauli_channel(rho, model.two_qubit, a, b, nv)
        rho = dn.apply_unitary(rho, CZ, (a, b), nv)
    return depolarize_to_diagonal(rho, g)


# ---------------------------------------------------------------------------
# effective maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EffectiveMap:
    """One-logical-qubit Pauli channel; ``probs`` in public (I,X,Y,Z) order."""

    probs: tuple
    scenario: str

    def __post_init__(self):
        p = tuple(float(x) for x in self.probs)
        if abs(sum(p) - 1.0) > 1e-9 or min(p) < -1e-12:
            raise ValueError("invalid Pauli-channel probabilities")
        object.__setattr__(self, "probs", p)

    def choi(self) -> np.ndarray:
        order = [0, 1, 3, 2]  # public IXYZ -> xz indices
        rho = np.zeros((4, 4), dtype=complex)
        for p, i in zip(self.probs, order):
            v = _bell_pair_vec(i)
            rho += p * np.outer(v, v.conj())
        return rho


def jamiolkowski_fidelity(m: EffectiveMap) -> float:
    """Overlap of the Choi state with the ideal identity-process Bell state."""
    return float(m.probs[0])


@functools.lru_cache(maxsize=None)
def _resource_error_map(code: Code):
    """Per basis index mu of the resource graph: (hub bit, leg string).

    A graph-basis deviation Z^mu corresponds to physical Z (or X after the
    leg Hadamards) on the deviated legs — equivalent to the same error on
    the read-in partners — and a Z on the hub."""
    nv = code.graph.n
    mus = np.arange(1 << nv)
    hub_bits = (mus >> (code.hub - 1)) & 1
    leg_label = 1 if code.leg_hadamard else _Z
    legstr = np.zeros_like(mus)
    for i, leg in enumerate(code.legs):
        legstr |= ((mus >> (leg - 1)) & 1) * (leg_label << (2 * i))
    return hub_bits.astype(np.int8), legstr.astype(np.int64)


def _apply_channel_to_dist(dist: np.ndarray, n: int, ch: PauliChannel) -> np.ndarray:
    probs = _chan_probs_xz(ch)
    idx = np.arange(dist.size)
    for q in range(n):
        new = np.zeros_like(dist)
        for t in range(4):
            if probs[t]:
                new += probs[t] * dist[idx ^ (t << (2 * q))]
        dist = new
    return dist


def _encode_stage(code: Code, resource: DiagonalState) -> np.ndarray:
    """Distribution over physical Pauli strings on the encoded qubits after
    the encode read-in with outcome-keyed logical corrections."""
    prob_e0, ell_e = _encode_base(code)
    reps = _logical_reps(code)
    hub_bits, legstr = _resource_error_map(code)
    dist = np.zeros(1 << (2 * code.n))
    lam = resource.coeffs
    for mu in np.nonzero(lam > 0)[0]:
        w = lam[mu]
        sigma_in = _Z if hub_bits[mu] else 0
        for beta in range(4):
            actual = ell_e[beta ^ sigma_in]
            assumed = ell_e[beta]
            net = reps[int(actual)] ^ reps[int(assumed)]
            dist[net ^ int(legstr[mu])] += w * prob_e0[beta ^ sigma_in]
    return dist


def _decode_stage(code: Code, resource: DiagonalState, dist: np.ndarray) -> tuple:
    """Fold decode-resource deviations into the error-string distribution and
    run the transfer table.  Returns the logical Pauli probabilities (xz)."""
    hub_bits, legstr = _resource_error_map(code)
    lam = resource.coeffs
    by_hub = np.zeros((2, dist.size))
    idx = np.arange(dist.size)
    for mu in np.nonzero(lam > 0)[0]:
        by_hub[int(hub_bits[mu])] += lam[mu] * dist[idx ^ int(legstr[mu])]
    transfer = decode_transfer(code)
    q = np.zeros(4)
    q += by_hub[0] @ transfer
    flipped = by_hub[1] @ transfer
    q[np.arange(4) ^ _Z] += flipped
    return q


_XZ_TO_PUBLIC = (0, 1, 3, 2)


def effective_map(scenario: str, code: Optional[Code] = None,
                  resources: Optional[dict] = None,
                  channel: Optional[PauliChannel] = None,
                  decode_impl: str = "measurement-based",
                  gate_model: Optional[GateNoiseModel] = None) -> EffectiveMap:
    """Choi-state computation for one communication scenario.

    Scenarios: ``unencoded`` (channel only), ``decode-only``,
    ``channel+decode``, ``encode+channel+decode``.  ``resources`` maps roles
    (``encode``/``decode``) to ResourceState or DiagonalState.  The
    gate-based baseline (``decode_impl="gate-based"``) simulates the
    encode/decode circuits densely with ``gate_model`` noise instead of
    resource states.
    """
    if scenario == "unencoded":
        ch = channel or PauliChannel.identity()
        return EffectiveMap(ch.probs, scenario)
    if code is None:
        raise ValueError("scenario requires a code")
    if decode_impl == "gate-based":
        return _gate_based_effective_map(scenario, code, gate_model, channel)
    if decode_impl != "measurement-based":
        raise ValueError(f"unknown decode implementation {decode_impl!r}")

    res = dict(resources or {})
    for k, v in list(res.items()):
        if isinstance(v, ResourceState):
            res[k] = v.state

    if scenario == "encode+channel+decode":
        if "encode" not in res:
            raise ValueError("encode resource required")
        dist = _encode_stage(code, res["encode"])
    elif scenario in ("decode-only", "channel+decode"):
        dist = np.zeros(1 << (2 * code.n))
        dist[0] = 1.0
    else:
        raise ValueError(f"unknown scenario {scenario!r}")

    if scenario != "decode-only" and channel is not None:
        dist = _apply_channel_to_dist(dist, code.n, channel)

    if "decode" not in res:
        raise ValueError("decode resource required")
    q_xz = _decode_stage(code, res["decode"], dist)
    probs = tuple(float(q_xz[i]) for i in _XZ_TO_PUBLIC)
    return EffectiveMap(probs, scenario)


# ---------------------------------------------------------------------------
# gate-based baseline (dense)
# ---------------------------------------------------------------------------

def _gate_noise_channels(model: Optional[GateNoiseModel]):
    """Channels placed on both qubits of each gate in the correction frame.

    The restricted (binary) model uses D_x on both qubits in the frame where
    the code corrects bit flips; uniform models are frame-independent."""
    if model is None or model.is_perfect:
        return None
    if model.kind == "local" and model.channels_by_color is not None:
        return PauliChannel.bitflip(model.param)
    return model


def _gate_circuits(code: Code):
    """(encode gate list, decode gate list, measured qubits) on the register
    ref=1, code qubits 2..n+1, in the frame where the code corrects X."""
    n = code.n
    first = 2
    if code.name.startswith("repetition"):
        cnots = [(first, first + i) for i in range(1, n)]
        enc = [("cnot", s, t) for s, t in cnots]
        dec = [("cnot", s, t) for s, t in cnots]
        return enc, dec, [first + i for i in range(1, n)]
    if code.name == "cluster-ring":
        cnots = [(first, first + i) for i in range(1, n)]
        ring = [(2, 3), (3, 4), (4, 5), (5, 6), (6, 2)]
        enc = [("cnot", s, t) for s, t in cnots]
        enc += [("h", q) for q in range(2, 7)]
        enc += [("cz", a, b) for a, b in ring]
        dec = [("cz", a, b) for a, b in ring]
        dec += [("h", q) for q in range(2, 7)]
        dec += [("cnot", s, t) for s, t in cnots]
        return enc, dec, [3, 4, 5, 6]
    raise ValueError(f"no gate-based circuits for {code.name}")


def _frame_unitary(code: Code, nv: int):
    """Layer mapping the correction frame to the physical frame (H on the
    code qubits for the phase-flip repetition variant)."""
    if code.name.startswith("repetition-phaseflip"):
        H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
        U = np.eye(1 << nv, dtype=complex)
        for q in range(2, code.n + 2):
            U = dn.embed_unitary(H, [q], nv) @ U
        return U
    return None


def _run_gates(rho, gates, model, nv):
    ch = _gate_noise_channels(model)
    for gate in gates:
        if gate[0] == "h":
            H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
            rho = dn.apply_unitary(rho, H, [gate[1]], nv)
            continue
        _, a, b = gate
        if isinstance(ch, PauliChannel):
            rho = dn.apply_pauli_channel(rho, ch, a, nv)
            rho = dn.apply_pauli_channel(rho, ch, b, nv)
        elif isinstance(ch, GateNoiseModel):
            if ch.kind == "local":
                rho = dn.apply_pauli_channel(rho, ch.qubit_channel(0), a, nv)
                rho = dn.apply_pauli_channel(rho, ch.qubit_channel(0), b, nv)
            else:
                rho = dn.apply_two_qubit_pauli_channel(rho, ch.two_qubit, a, b, nv)
        U = dn.GATE_MATRICES["CNOT"] if gate[0] == "cnot" else dn.GATE_MATRICES["CZ"]
        rho = dn.apply_unitary(rho, U, (a, b), nv)
    return rho


@functools.lru_cache(maxsize=None)
def _gate_syndrome_table(code: Code) -> dict:
    """syndrome (bit tuple on measured qubits) -> xz correction on output."""
    nv = code.n + 1
    enc, dec, measured = _gate_circuits(code)
    bell = np.zeros(1 << nv, dtype=complex)
    bell[0] = bell[(1 << 0) | (1 << 1)] = 1.0 / math.sqrt(2.0)
    rho0 = dn.pure_state_operator(bell)
    rho0 = _run_gates(rho0, enc, None, nv)
    table = {}
    frame_swap = _frame_unitary(code, nv) is not None
    for T in code.correctable:
        rho = rho0
        # physical correctable strings, H-conjugated into the correction
        # frame when the code is the phase-flip variant (X <-> Z per digit)
        frame_err = _h_conjugate_string(T, code.n) if frame_swap else T
        for q in range(code.n):
            lab = (frame_err >> (2 * q)) & 3
            if lab:
                from .graphs import PauliString

                m = PauliString.single(nv, q + 2, XZ_LETTERS[lab]).matrix()
                rho = m @ rho @ m.conj().T
        rho = _run_gates(rho, dec, None, nv)
        found = None
        for bits in itertools.product((0, 1), repeat=len(measured)):
            proj = rho
            for q, b in zip(measured, bits):
                P = np.diag([1.0 - b, float(b)]).astype(complex)
                proj = dn.embed_unitary(P, [q], nv) @ proj @ dn.embed_unitary(P, [q], nv)
            p = float(np.trace(proj).real)
            if p > 1e-9:
                if found is not None:
                    raise AmbiguousPatternError("non-deterministic syndrome")
                found = bits
                sub = _trace_to_pair(proj / p, nv)
                corr = _classify_bell_pair(sub)
                if table.get(bits, corr) != corr:
                    raise AmbiguousPatternError("syndrome shared by two errors")
                table[bits] = corr
        if found is None:
            raise ValueError("no syndrome branch found")
    return table


def _h_conjugate_string(t: int, n: int) -> int:
    """Swap the x and z bits of every digit (H conjugation, phase dropped)."""
    out = 0
    for q in range(n):
        d = (t >> (2 * q)) & 3
        out |= ((d >> 1) | ((d & 1) << 1)) << (2 * q)
    return out


def _trace_to_pair(rho, nv):
    """Partial trace down to (qubit 1 = ref, qubit 2 = output), little-endian
    pair index (qubit 1 = bit 0) matching the dense-module convention."""
    rest = list(range(3, nv + 1))
    t = rho.reshape((2,) * (2 * nv))
    # ket axis of qubit q is nv - q (row-major: first axis = highest bit)
    ket = [nv - 2, nv - 1] + [nv - q for q in rest]   # (q2, q1, rest...)
    perm = ket + [nv + a for a in ket]
    t = t.transpose(perm)
    r = 1 << len(rest)
    t = t.reshape(4, r, 4, r)
    return np.einsum("iaja->ij", t)


def _bell_pair_vec(i: int) -> np.ndarray:
    """Bell state (1 ⊗ sigma_i)|Phi+> in little-endian pair order."""
    return _bell_tensor()[i].T.reshape(-1)


def _classify_bell_pair(rho4) -> int:
    """xz label i with rho ≈ (1⊗sigma_i)|Phi+><Phi+|(1⊗sigma_i)."""
    best, best_val = 0, -1.0
    for i in range(4):
        v = _bell_pair_vec(i)
        val = float(np.real(v.conj() @ rho4 @ v))
        if val > best_val:
            best, best_val = i, val
    if best_val < 1.0 - 1e-8:
        raise ValueError("branch is not a Bell state")
    return best


def _gate_based_effective_map(scenario, code, model, channel) -> EffectiveMap:
    nv = code.n + 1
    enc, dec, measured = _gate_circuits(code)
    frame = _frame_unitary(code, nv)

    bell = np.zeros(1 << nv, dtype=complex)
    bell[0] = bell[(1 << 0) | (1 << 1)] = 1.0 / math.sqrt(2.0)
    rho = dn.pure_state_operator(bell)
    if scenario == "encode+channel+decode":
        rho = _run_gates(rho, enc, model, nv)
    elif scenario in ("channel+decode", "decode-only"):
        rho = _run_gates(rho, enc, None, nv)
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    if frame is not None:
        rho = frame @ rho @ frame.conj().T

    if scenario != "decode-only" and channel is not None:
        for q in range(2, code.n + 2):
            rho = dn.apply_pauli_channel(rho, channel, q, nv)

    if frame is not None:
        rho = frame.conj().T @ rho @ frame
    rho = _run_gates(rho, dec, model, nv)

    table = _gate_syndrome_table(code)
    B = _bell_tensor()
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    sig = [np.eye(2, dtype=complex), X, Z, X @ Z * 1j]
    out = np.zeros((4, 4), dtype=complex)
    for bits, corr in table.items():
        proj = rho
        for q, b in zip(measured, bits):
            P = np.diag([1.0 - b, float(b)]).astype(complex)
            full = dn.embed_unitary(P, [q], nv)
            proj = full @ proj @ full
        sub = _trace_to_pair(proj, nv)
        C = sig[corr]
        # pair basis: qubit 1 = bit 0 (ref), qubit 2 = bit 1 (output)
        Cfull = dn.embed_unitary(C, [2], 2)
        out += Cfull @ sub @ Cfull.conj().T
    # read the Pauli-channel probabilities off the Choi state
    probs_xz = [float(np.real(_bell_pair_vec(i).conj() @ out @ _bell_pair_vec(i)))
                for i in range(4)]
    total = sum(probs_xz)
    probs_xz = [max(p, 0.0) / total for p in probs_xz]
    probs = tuple(probs_xz[i] for i in _XZ_TO_PUBLIC)
    return EffectiveMap(probs, scenario + " (gate-based)")


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def advantage_threshold(code: Code, channel_kind: str,
                        resources: dict, scenario: str = "channel+decode",
                        lo: float = 0.01, hi: float = 0.99,
                        tol: float = 1e-4) -> float:
    """Channel parameter where encoded transmission starts beating the
    unencoded channel (bisection on the fidelity difference)."""

    def diff(q):
        ch = PauliChannel.bitflip(q) if channel_kind == "bitflip" else (
            PauliChannel.phaseflip(q) if channel_kind == "phaseflip"
            else PauliChannel.depolarizing(q))
        enc = effective_map(scenario, code, resources, ch)
        unenc = effective_map("unencoded", channel=ch)
        return jamiolkowski_fidelity(enc) - jamiolkowski_fidelity(unenc)

    if diff(lo) * diff(hi) > 0:
        raise ValueError("no crossing inside the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if diff(mid) * diff(hi) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def region_scan(code: Code, p_grid, q_grid, gate_kind: str = "binary",
                channel_kind: str = "phaseflip",
                scenario: str = "channel+decode",
                approaches=("epp", "direct", "gate", "unencoded")) -> list:
    """Advantage-region table over (gate parameter p, channel parameter q).

    Rows: (p, q, approach, jam_fidelity, beats_unencoded)."""
    makers = {"binary": GateNoiseModel.binary,
              "depolarizing": GateNoiseModel.depolarizing,
              "correlated": GateNoiseModel.correlated}
    chan = {"phaseflip": PauliChannel.phaseflip,
            "bitflip": PauliChannel.bitflip,
            "depolarizing": PauliChannel.depolarizing}[channel_kind]
    rows = []
    for p in p_grid:
        model = makers[gate_kind](p)
        prepared = {}
        if "epp" in approaches:
            try:
                step = "P2-only" if gate_kind == "binary" else "P1"
                r = build_resource(code, "decode", ("epp", model, step))
                prepared["epp"] = {"decode": r, "encode": r}
            except Exception as exc:
                prepared["epp"] = exc
        if "direct" in approaches:
            try:
                r = build_resource(code, "decode", ("direct", model))
                prepared["direct"] = {"decode": r, "encode": r}
            except Exception as exc:
                prepared["direct"] = exc
        for q in q_grid:
            ch = chan(q)
            f_un = jamiolkowski_fidelity(effective_map("unencoded", channel=ch))
            for approach in approaches:
                if approach == "unencoded":
                    rows.append((p, q, approach, f_un, False))
                    continue
                try:
                    if approach == "gate":
                        m = effective_map(scenario, code, channel=ch,
                                          decode_impl="gate-based",
                                          gate_model=model)
                    else:
                        res = prepared[approach]
                        if isinstance(res, Exception):
                            raise res
                        m = effective_map(scenario, code, res, ch)
                    f = jamiolkowski_fidelity(m)
                    rows.append((p, q, approach, f, bool(f > f_un)))
                except Exception:
                    rows.append((p, q, approach, float("nan"), False))
    return rows


def by_fidelity_rows(p_grid, q_grid) -> list:
    """Equal-fidelity resource comparison for the cluster-ring code.

    For each gate parameter p the purified resource's fidelity is matched by
    a local-depolarizing and a global-depolarizing resource (root-finding to
    1e-10 on λ0); rows: (p, resource_fidelity, q, approach, jam_fidelity)."""
    code = cluster_ring_code()
    rows = []
    nv = code.graph.n
    for p in p_grid:
        model = GateNoiseModel.depolarizing(p)
        epp_res = build_resource(code, "decode", ("epp", model))
        lam0 = float(epp_res.state.coeffs[0])

        def local_gap(x):
            s = apply_channel_everywhere(DiagonalState.pure(code.graph),
                                         PauliChannel.depolarizing(x))
            return float(s.coeffs[0]) - lam0

        x = brentq(local_gap, 0.0, 1.0, xtol=MATCH_ROOT_TOL)
        local_res = apply_channel_everywhere(DiagonalState.pure(code.graph),
                                             PauliChannel.depolarizing(x))
        dim = 1 << nv
        p_tilde = (lam0 - 1.0 / dim) / (1.0 - 1.0 / dim)
        glob = np.full(dim, (1.0 - p_tilde) / dim)
        glob[0] += p_tilde
        global_res = DiagonalState(code.graph, glob)

        for q in q_grid:
            ch = PauliChannel.depolarizing(q)
            for name, res in (("epp", epp_res.state), ("local", local_res),
                              ("global", global_res)):
                m = effective_map("channel+decode", code, {"decode": res}, ch)
                rows.append((p, lam0, q, name, jamiolkowski_fidelity(m)))
    return rows
