"""Multipartite entanglement purification on graph-diagonal states.

Two-colorable graphs use the alternating subprotocols P1/P2; k-colorable
graphs use one subprotocol per color class against auxiliary two-colorable
graph states.  Noisy CNOTs are expanded exactly as Pauli mixtures over the
joint two-copy index distribution (no sampling): within one multilateral
step every CNOT acts on a disjoint qubit pair, so all gate channels can be
applied before the joint perfect permutation.

Index maps (copy 1 = kept, copy 2 = measured), with A/B the color classes:

P1:   mu' = (mu & A) | ((mu ^ nu) & B),  nu' = ((mu ^ nu) & A) | (nu & B);
      postselect nu' & A == 0.
P2:   roles of A and B swapped.
P_j (k-colorable, auxiliary graph G_j = edges of G incident to class V_j):
      mu' = (mu & C) | ((mu ^ nu) & ~C),  nu' = ((mu ^ nu) & C) | (nu & ~C);
      postselect nu' & C == 0 (C = packed mask of V_j); remaining auxiliary
      qubits are traced out.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .diagonal import DiagonalState, JointDiagonalState, channel_masks
from .graphs import Graph, Coloring, PauliString, color, pauli_index_action
from .noise import GateNoiseModel
from .tolerances import EPP_CONVERGENCE_TOL, EPP_MAX_CYCLES, SUCCESS_PROB_FLOOR

__all__ = [
    "EppSchedule",
    "EppResult",
    "ProtocolFailure",
    "multilateral_cnot",
    "p_step",
    "aux_graph_for_color",
    "allgraph_step",
    "fixed_point",
]


class ProtocolFailure(RuntimeError):
    """Raised when the postselection probability collapses below floor."""


@dataclass(frozen=True)
class EppSchedule:
    """Order of subprotocols per cycle plus convergence policy.

    ``steps`` holds ``"P1"``/``"P2"`` for two-colorable graphs or integer
    color indices for the all-graph protocol; the cycle is arranged so each
    full cycle ends with the configured final step.  ``aux_final_steps`` maps
    color index -> "P1"/"P2" end-step for that auxiliary state's own EPP.
    """

    steps: tuple
    max_rounds: int = EPP_MAX_CYCLES
    tol: float = EPP_CONVERGENCE_TOL
    aux_final_steps: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.steps:
            raise ValueError("empty schedule")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")

    @classmethod
    def alternating(cls, final_step: str = "P1", **kw) -> "EppSchedule":
        if final_step not in ("P1", "P2"):
            raise ValueError("final step must be P1 or P2")
        first = "P2" if final_step == "P1" else "P1"
        return cls(steps=(first, final_step), **kw)

    @classmethod
    def cyclic(cls, k: int, final_color: Optional[int] = None, **kw) -> "EppSchedule":
        if final_color is None:
            final_color = k - 1
        order = [(final_color + 1 + i) % k for i in range(k)]
        return cls(steps=tuple(order), **kw)


@dataclass(frozen=True)
class EppResult:
    state: DiagonalState
    rounds: int
    success_probs: tuple
    converged: bool
    final_step: object = None


# ---------------------------------------------------------------------------
# index machinery
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _joint_index_maps(n: int, a_mask: int):
    """Flattened target indices of the P-type permutation with set mask A."""
    d = 1 << n
    b_mask = (d - 1) ^ a_mask
    mu = np.arange(d, dtype=np.int64)[:, None]
    nu = np.arange(d, dtype=np.int64)[None, :]
    mu_new = (mu & a_mask) | ((mu ^ nu) & b_mask)
    nu_new = ((mu ^ nu) & a_mask) | (nu & b_mask)
    flat = (mu_new * d + nu_new).ravel()
    return flat


def _permute_joint(coeffs: np.ndarray, n: int, a_mask: int) -> np.ndarray:
    d = 1 << n
    out = np.empty(d * d)
    out[_joint_index_maps(n, a_mask)] = coeffs.ravel()
    return out.reshape(d, d)


def multilateral_cnot(j: JointDiagonalState, coloring: Coloring,
                      which: str = "P1") -> JointDiagonalState:
    """Perfect multilateral CNOT permutation in P1 or P2 orientation."""
    if not coloring.is_two_colorable:
        raise ValueError("multilateral CNOT requires a two-colorable graph")
    a_mask = coloring.class_mask(0 if which == "P1" else 1)
    return JointDiagonalState(j.graph, _permute_joint(j.coeffs, j.graph.n, a_mask))


def _apply_gate_noise_joint(coeffs, main_graph: Graph, aux_graph: Graph,
                            coloring: Coloring, model: Optional[GateNoiseModel],
                            vertices) -> np.ndarray:
    """Apply per-CNOT channels to both copies for every participating vertex.

    Copy 1 lives on ``main_graph`` (row index), copy 2 on ``aux_graph``
    (column index); masks are computed in each copy's own graph basis.
    """
    if model is None or model.is_perfect:
        return coeffs
    d1, d2 = coeffs.shape
    out = coeffs
    for v in vertices:
        cidx = coloring.colors[v - 1]
        if model.kind == "local":
            ch = model.qubit_channel(cidx)
            mix1 = channel_masks(main_graph, v, ch)
            mix2 = channel_masks(aux_graph, v, ch)
            new = np.zeros_like(out)
            for w1, m1 in mix1:
                rows = np.arange(d1) ^ m1
                sub = out[rows, :]
                for w2, m2 in mix2:
                    new += (w1 * w2) * sub[:, np.arange(d2) ^ m2]
            out = new
        else:
            probs = model.two_qubit.probs
            new = np.zeros_like(out)
            for i, li in enumerate("IXYZ"):
                m1 = pauli_index_action(PauliString.single(main_graph.n, v, li), main_graph)
                sub = out[np.arange(d1) ^ m1, :]
                for jx, lj in enumerate("IXYZ"):
                    w = probs[i][jx]
                    if w:
                        m2 = pauli_index_action(
                            PauliString.single(aux_graph.n, v, lj), aux_graph)
                        new += w * sub[:, np.arange(d2) ^ m2]
            out = new
    return out


def p_step(s: DiagonalState, coloring: Coloring,
           model: Optional[GateNoiseModel] = None,
           which: str = "P1"):
    """One two-copy purification step; returns (state, success probability).

    Two identical copies are combined by the multilateral CNOT; the second
    copy's set-A (P1) or set-B (P2) correlation operators are measured and
    all +1 outcomes postselected; the rest of copy 2 is traced out.
    """
    if which not in ("P1", "P2"):
        raise ValueError("which must be P1 or P2")
    if not coloring.is_two_colorable:
        raise ValueError("P1/P2 require a two-colorable graph")
    g = s.graph
    n = g.n
    joint = np.outer(s.coeffs, s.coeffs)
    joint = _apply_gate_noise_joint(joint, g, g, coloring, model, range(1, n + 1))
    sel_mask = coloring.class_mask(0 if which == "P1" else 1)
    joint = _permute_joint(joint, n, sel_mask)
    # postselect nu' & sel_mask == 0, trace out the rest of copy 2
    nu = np.arange(1 << n)
    keep = (nu & sel_mask) == 0
    reduced = joint[:, keep].sum(axis=1)
    p_suc = float(reduced.sum())
    if p_suc < SUCCESS_PROB_FLOOR:
        raise ProtocolFailure(f"success probability {p_suc} below floor")
    return DiagonalState(g, reduced / p_suc), p_suc


def aux_graph_for_color(g: Graph, coloring: Coloring, c: int) -> Graph:
    """Two-colorable auxiliary graph: edges of ``g`` incident to class ``c``."""
    verts = set(coloring.class_vertices(c))
    edges = frozenset(e for e in g.edges if e[0] in verts or e[1] in verts)
    return Graph(g.n, edges)


def allgraph_step(s: DiagonalState, coloring: Coloring, aux,
                  model: Optional[GateNoiseModel] = None, c: int = 0):
    """One subprotocol P_c step against an auxiliary two-colorable state.

    ``aux`` is the auxiliary DiagonalState for color ``c`` (or a sequence
    indexed by color).  Success = all measured class-``c`` correlation
    outcomes +1 on the auxiliary copy.
    """
    if isinstance(aux, (list, tuple)):
        aux = aux[c]
    g = s.graph
    n = g.n
    g_aux = aux_graph_for_color(g, coloring, c)
    if aux.graph != g_aux:
        raise ValueError("auxiliary state graph does not match this color")
    sel_mask = coloring.class_mask(c)
    participants = [v for v in range(1, n + 1)
                    if (sel_mask >> (v - 1)) & 1 or g_aux.degree(v) > 0]
    joint = np.outer(s.coeffs, aux.coeffs)
    joint = _apply_gate_noise_joint(joint, g, g_aux, coloring, model, participants)
    joint = _permute_joint(joint, n, sel_mask)
    nu = np.arange(1 << n)
    keep = (nu & sel_mask) == 0
    reduced = joint[:, keep].sum(axis=1)
    p_suc = float(reduced.sum())
    if p_suc < SUCCESS_PROB_FLOOR:
        raise ProtocolFailure(f"success probability {p_suc} below floor")
    return DiagonalState(g, reduced / p_suc), p_suc


def _aux_fixed_points(g: Graph, coloring: Coloring,
                      model: Optional[GateNoiseModel],
                      schedule: EppSchedule) -> dict:
    """Fixed-point auxiliary states for every color under the same model."""
    out = {}
    for c in range(coloring.k):
        g_aux = aux_graph_for_color(g, coloring, c)
        final = schedule.aux_final_steps.get(c, "P2")
        sub = EppSchedule.alternating(final_step=final,
                                      max_rounds=schedule.max_rounds,
                                      tol=schedule.tol)
        res = fixed_point(model, g_aux, schedule=sub)
        out[c] = res.state
    return out


def fixed_point(model: Optional[GateNoiseModel], g: Graph,
                schedule: Optional[EppSchedule] = None,
                initial: Optional[DiagonalState] = None,
                coloring: Optional[Coloring] = None,
                aux_states: Optional[dict] = None) -> EppResult:
    """Iterate the purification schedule to its fixed point.

    Convergence: L-infinity change of the coefficient vector between
    consecutive full schedule cycles below the schedule tolerance.  The
    reported state is the one after the cycle's configured final step.
    """
    if coloring is None:
        coloring = color(g)
    if schedule is None:
        schedule = (EppSchedule.alternating() if coloring.is_two_colorable
                    else EppSchedule.cyclic(coloring.k))
    state = initial if initial is not None else DiagonalState.pure(g)
    if state.graph != g:
        raise ValueError("initial state graph mismatch")
    if not coloring.is_two_colorable and aux_states is None:
        aux_states = _aux_fixed_points(g, coloring, model, schedule)

    success: list = []
    prev = state.coeffs
    converged = False
    rounds = 0
    for cycle in range(schedule.max_rounds):
        for step in schedule.steps:
            if step in ("P1", "P2"):
                state, p = p_step(state, coloring, model, which=step)
            else:
                state, p = allgraph_step(state, coloring, aux_states[step],
                                         model, c=step)
            success.append(p)
        rounds = cycle + 1
        delta = float(np.max(np.abs(state.coeffs - prev)))
        prev = state.coeffs
        if delta < schedule.tol:
            converged = True
            break
    return EppResult(state=state, rounds=rounds, success_probs=tuple(success),
                     converged=converged, final_step=schedule.steps[-1])
