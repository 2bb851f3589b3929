"""Diagonal engine: distributions over graph-state basis indices.

A ``DiagonalState`` stores the ``2^n`` nonnegative coefficients of a density
operator diagonal in the graph-state basis of its graph (bit ``v-1`` of the
packed index = deviation bit of vertex ``v``, little-endian).  Every state
in the purification / decoding pipeline is of this form, so Pauli channels
act as convex mixtures of index permutations (XOR masks).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, PauliString, graph_basis_state_dense, pauli_index_action
from .noise import PauliChannel
from .tolerances import NORMALIZATION_TOL

__all__ = [
    "DiagonalState",
    "JointDiagonalState",
    "apply_pauli_mask",
    "apply_local_channel",
    "apply_channel_everywhere",
    "fidelity_diagonal",
    "fidelity_to_pure",
    "depolarize_to_diagonal",
    "state_to_json",
    "state_from_json",
]

_MASK_LETTERS = ("I", "X", "Y", "Z")


def _freeze(arr):
    a = np.array(arr, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DiagonalState:
    """Probability vector over the graph-state basis of ``graph``."""

    graph: Graph
    coeffs: np.ndarray

    def __post_init__(self):
        a = _freeze(self.coeffs)
        if a.shape != (1 << self.graph.n,):
            raise ValueError("coefficient length must be 2^n")
        if a.min() < -NORMALIZATION_TOL:
            raise ValueError(f"negative coefficient {a.min()}")
        if abs(a.sum() - 1.0) > 1e-9:
            raise ValueError(f"coefficients sum to {a.sum()}, not 1")
        object.__setattr__(self, "coeffs", a)

    @classmethod
    def pure(cls, graph: Graph) -> "DiagonalState":
        c = np.zeros(1 << graph.n)
        c[0] = 1.0
        return cls(graph, c)

    @property
    def n(self) -> int:
        return self.graph.n


@dataclass(frozen=True)
class JointDiagonalState:
    """Two copies of a graph state: ``coeffs[mu, nu]`` over index pairs."""

    graph: Graph
    coeffs: np.ndarray

    def __post_init__(self):
        a = _freeze(self.coeffs)
        d = 1 << self.graph.n
        if a.shape != (d, d):
            raise ValueError("coefficient shape must be (2^n, 2^n)")
        if a.min() < -NORMALIZATION_TOL or abs(a.sum() - 1.0) > 1e-9:
            raise ValueError("invalid joint distribution")
        object.__setattr__(self, "coeffs", a)

    @classmethod
    def product(cls, s: DiagonalState, t: DiagonalState) -> "JointDiagonalState":
        if s.graph != t.graph:
            raise ValueError("graph mismatch")
        return cls(s.graph, np.outer(s.coeffs, t.coeffs))


def apply_pauli_mask(coeffs: np.ndarray, mask: int) -> np.ndarray:
    """Permute coefficients by XOR with ``mask``."""
    if mask == 0:
        return coeffs
    idx = np.arange(coeffs.size) ^ mask
    return coeffs[idx]


def channel_masks(graph: Graph, q: int, c: PauliChannel):
    """(weight, mask) pairs for a single-qubit channel on vertex ``q``."""
    out = []
    for prob, letter in zip(c.probs, _MASK_LETTERS):
        if prob:
            mask = pauli_index_action(PauliString.single(graph.n, q, letter), graph)
            out.append((prob, mask))
    return out


def apply_local_channel(s: DiagonalState, q: int, c: PauliChannel) -> DiagonalState:
    """Mix index permutations: ``λ' = Σ_i p_i (λ permuted by mask_i)``."""
    new = np.zeros_like(s.coeffs)
    for prob, mask in channel_masks(s.graph, q, c):
        new += prob * apply_pauli_mask(s.coeffs, mask)
    return DiagonalState(s.graph, new)


def apply_channel_everywhere(s: DiagonalState, c: PauliChannel) -> DiagonalState:
    for q in range(1, s.graph.n + 1):
        s = apply_local_channel(s, q, c)
    return s


def fidelity_diagonal(a: DiagonalState, b: DiagonalState) -> float:
    """Uhlmann fidelity ``Σ_µ sqrt(λ_µ ω_µ)`` (exact for commuting states)."""
    if a.graph != b.graph:
        raise ValueError("graph mismatch")
    return float(np.sqrt(np.clip(a.coeffs, 0, None) * np.clip(b.coeffs, 0, None)).sum())


def fidelity_to_pure(s: DiagonalState) -> float:
    """Fidelity against the pure graph state: ``sqrt(λ_0)``."""
    return float(np.sqrt(max(s.coeffs[0], 0.0)))


def depolarize_to_diagonal(mat: np.ndarray, g: Graph) -> DiagonalState:
    """Project a dense density operator onto the graph-state basis diagonal.

    ``λ_µ = <µ|ρ|µ>``; the fidelity to ``|G>`` is unchanged.
    """
    mat = np.asarray(mat, dtype=complex)
    tr = np.trace(mat)
    if abs(tr - 1.0) > 1e-8:
        raise ValueError(f"trace deviates from 1: {tr}")
    dim = 1 << g.n
    if mat.shape != (dim, dim):
        raise ValueError("dimension mismatch")
    # basis matrix B[x, µ] = amplitudes of |µ>; real for graph states
    base = graph_basis_state_dense(g, 0).real
    x = np.arange(dim)
    # (-1)^{popcount(x & µ)} via iterative construction (Walsh signs)
    signs = np.ones((dim, dim))
    for bit in range(g.n):
        signs[:, :] *= np.where(
            (((x[:, None] >> bit) & 1) & ((x[None, :] >> bit) & 1)) == 1, -1.0, 1.0
        )
    B = base[:, None] * signs
    lam = np.einsum("xm,xy,ym->m", B, mat, B).real
    lam = np.clip(lam, 0.0, None)
    lam = lam / lam.sum()
    return DiagonalState(g, lam)


def diagonal_to_dense(s: DiagonalState) -> np.ndarray:
    """Dense density operator of a diagonal state (oracle use)."""
    dim = 1 << s.graph.n
    rho = np.zeros((dim, dim), dtype=complex)
    for mu in range(dim):
        if s.coeffs[mu] > 0:
            vec = graph_basis_state_dense(s.graph, mu)
            rho += s.coeffs[mu] * np.outer(vec, vec.conj())
    return rho


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def state_to_json(s: DiagonalState) -> str:
    """Serialize (little-endian bit order: bit v-1 = deviation of vertex v)."""
    return json.dumps(
        {
            "bit_order": "little-endian: bit v-1 of the packed index is vertex v",
            "graph": {"n": s.graph.n, "edges": sorted(map(list, s.graph.edges))},
            "coeffs": s.coeffs.tolist(),
        }
    )


def state_from_json(text: str) -> DiagonalState:
    doc = json.loads(text)
    g = Graph(doc["graph"]["n"], frozenset(tuple(e) for e in doc["graph"]["edges"]))
    return DiagonalState(g, np.array(doc["coeffs"]))
