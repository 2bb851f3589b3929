"""Dense density-operator oracle (n <= 12 qubits).

Exact reference engine used to validate the diagonal engines.  States are
``2^n x 2^n`` complex matrices with vertex ``v`` on bit ``v-1`` of the row /
column index (little-endian, same convention as the packed basis indices).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, PauliString, graph_state_dense
from .noise import (
    GATE_MATRICES,
    GateNoiseModel,
    GlobalDepolarizing,
    PauliChannel,
    TwoQubitPauliChannel,
    noisy_cnot_mixture,
)
from .tolerances import (
    DENSE_QUBIT_LIMIT,
    HERMITICITY_TOL,
    NORMALIZATION_TOL,
    PSD_EIG_FLOOR,
)

__all__ = [
    "DenseOperator",
    "embed_unitary",
    "apply_unitary",
    "apply_pauli_channel",
    "apply_two_qubit_pauli_channel",
    "project",
    "dense_evolve",
    "pure_state_operator",
]


@dataclass(frozen=True)
class DenseOperator:
    """Density operator with validity checks against centralized tolerances."""

    mat: np.ndarray
    n: int

    def __post_init__(self):
        if self.n > DENSE_QUBIT_LIMIT:
            raise ValueError("dense limit exceeded")
        m = np.asarray(self.mat, dtype=complex)
        if m.shape != (1 << self.n, 1 << self.n):
            raise ValueError("dimension mismatch")
        object.__setattr__(self, "mat", m)

    def validate(self) -> "DenseOperator":
        m = self.mat
        if abs(np.trace(m).real - 1.0) > 1e-8 or abs(np.trace(m).imag) > 1e-8:
            raise ValueError(f"trace {np.trace(m)} != 1")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("not Hermitian")
        eig = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if eig.min() < PSD_EIG_FLOOR:
            raise ValueError(f"negative eigenvalue {eig.min()}")
        return self


def pure_state_operator(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def embed_unitary(U: np.ndarray, qubits, n: int) -> np.ndarray:
    """Expand a small unitary on ``qubits`` (1-based) to the full register.

    Qubit ``qubits[i]`` is bit ``i`` of the small index.
    """
    k = len(qubits)
    dim = 1 << n
    small = 1 << k
    if U.shape != (small, small):
        raise ValueError("gate arity mismatch")
    full = np.zeros((dim, dim), dtype=complex)
    positions = [q - 1 for q in qubits]
    sel = 0
    for pos in positions:
        sel |= 1 << pos
    rest = np.array([i for i in range(dim) if (i & sel) == 0], dtype=np.int64)

    def scatter(a):
        out = 0
        for i, pos in enumerate(positions):
            out |= ((a >> i) & 1) << pos
        return out

    for a in range(small):
        ia = scatter(a)
        for b in range(small):
            if U[a, b] == 0:
                continue
            full[rest + ia, rest + scatter(b)] = U[a, b]
    return full


def apply_unitary(rho: np.ndarray, U: np.ndarray, qubits, n: int) -> np.ndarray:
    full = embed_unitary(U, qubits, n)
    return full @ rho @ full.conj().T


def apply_pauli_string(rho: np.ndarray, p: PauliString) -> np.ndarray:
    m = p.matrix()
    return m @ rho @ m.conj().T


def apply_pauli_channel(rho: np.ndarray, ch: PauliChannel, q: int, n: int) -> np.ndarray:
    out = np.zeros_like(rho)
    for prob, letter in zip(ch.probs, "IXYZ"):
        if prob:
            m = PauliString.single(n, q, letter).matrix()
            out += prob * (m @ rho @ m.conj().T)
    return out


def apply_two_qubit_pauli_channel(rho, ch: TwoQubitPauliChannel, a: int, b: int, n: int):
    out = np.zeros_like(rho)
    for i, la in enumerate("IXYZ"):
        for j, lb in enumerate("IXYZ"):
            prob = ch.probs[i][j]
            if prob:
                p = PauliString.single(n, a, la) * PauliString.single(n, b, lb)
                m = p.matrix()
                out += prob * (m @ rho @ m.conj().T)
    return out


def project(rho: np.ndarray, P: np.ndarray, qubits, n: int):
    """Postselect on projector ``P`` over ``qubits``; returns (rho', prob)."""
    full = embed_unitary(P, qubits, n)
    new = full @ rho @ full.conj().T
    prob = float(np.trace(new).real)
    if prob > 0:
        new = new / prob
    return new, prob


def dense_evolve(d: DenseOperator, circuit) -> tuple:
    """Run a list of circuit elements; returns (DenseOperator, branch probs).

    Elements (tuples):
      ("unitary", name_or_matrix, qubits)
      ("channel", PauliChannel, q)
      ("channel2", TwoQubitPauliChannel, (a, b))
      ("noisy_cnot", GateNoiseModel, (source, target)[, (src_color, tgt_color)])
      ("global_depolarizing", p_tilde)
      ("project", projector_matrix, qubits)   -> records branch probability
    """
    rho = d.mat.copy()
    n = d.n
    probs = []
    for element in circuit:
        tag = element[0]
        if tag == "unitary":
            U = element[1]
            if isinstance(U, str):
                U = GATE_MATRICES[U]
            rho = apply_unitary(rho, U, element[2], n)
        elif tag == "channel":
            rho = apply_pauli_channel(rho, element[1], element[2], n)
        elif tag == "channel2":
            a, b = element[2]
            rho = apply_two_qubit_pauli_channel(rho, element[1], a, b, n)
        elif tag == "noisy_cnot":
            model: GateNoiseModel = element[1]
            s, t = element[2]
            colors = element[3] if len(element) > 3 else (0, 0)
            out = np.zeros_like(rho)
            for w, pstr in noisy_cnot_mixture(model, s, t, n, *colors):
                out += w * apply_pauli_string(rho, pstr)
            rho = apply_unitary(out, GATE_MATRICES["CNOT"], (s, t), n)
        elif tag == "global_depolarizing":
            rho = GlobalDepolarizing(element[1], n).apply_dense(rho)
        elif tag == "project":
            rho, p = project(rho, element[1], element[2], n)
            probs.append(p)
        else:
            raise ValueError(f"unknown circuit element {tag!r}")
    return DenseOperator(rho, n), probs


def graph_state_density(g: Graph) -> DenseOperator:
    return DenseOperator(pure_state_operator(graph_state_dense(g)), g.n)
