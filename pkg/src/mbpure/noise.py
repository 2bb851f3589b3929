"""Pauli noise channels and noisy-gate models.

All noise in scope is a Pauli mixture attached to an otherwise perfect
Clifford gate, applied to the gate's qubits *before* the perfect operation.
Channels are stored as probability vectors over ``(I, X, Y, Z)``; dense
superoperators are generated on demand by the oracle engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graphs import PauliString
from .tolerances import NORMALIZATION_TOL

__all__ = [
    "PauliChannel",
    "TwoQubitPauliChannel",
    "GateNoiseModel",
    "GlobalDepolarizing",
    "make_channel",
    "noisy_cnot_mixture",
    "conjugate_pauli_through_clifford",
    "GATE_MATRICES",
]

LETTERS = "IXYZ"


def _check_probs(probs, count):
    probs = tuple(float(p) for p in probs)
    if len(probs) != count:
        raise ValueError(f"need {count} probabilities")
    if any(p < -NORMALIZATION_TOL for p in probs):
        raise ValueError("negative probability")
    if abs(sum(probs) - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {sum(probs)}, not 1")
    return probs


@dataclass(frozen=True)
class PauliChannel:
    """Single-qubit Pauli mixture ``rho -> sum_i p_i sigma_i rho sigma_i``.

    ``probs`` is ordered ``(p_I, p_X, p_Y, p_Z)``.
    """

    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", _check_probs(self.probs, 4))

    @classmethod
    def identity(cls) -> "PauliChannel":
        return cls((1.0, 0.0, 0.0, 0.0))

    @classmethod
    def bitflip(cls, p: float) -> "PauliChannel":
        """D_x: keep with probability p, apply X with 1-p."""
        _range_check(p)
        return cls((p, 1.0 - p, 0.0, 0.0))

    @classmethod
    def phaseflip(cls, p: float) -> "PauliChannel":
        """D_z: keep with probability p, apply Z with 1-p."""
        _range_check(p)
        return cls((p, 0.0, 0.0, 1.0 - p))

    @classmethod
    def depolarizing(cls, p: float) -> "PauliChannel":
        """D_w: identity weight p + (1-p)/4, each Pauli (1-p)/4."""
        _range_check(p)
        q = (1.0 - p) / 4.0
        return cls((p + q, q, q, q))

    @property
    def is_identity(self) -> bool:
        return self.probs[0] == 1.0


def _range_check(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"parameter {p} outside [0, 1]")


def make_channel(name: str, param: float) -> PauliChannel:
    """Build a named channel: ``bitflip``, ``phaseflip`` or ``depolarizing``."""
    try:
        maker = {
            "bitflip": PauliChannel.bitflip,
            "phaseflip": PauliChannel.phaseflip,
            "depolarizing": PauliChannel.depolarizing,
        }[name]
    except KeyError:
        raise ValueError(f"unknown channel kind {name!r}") from None
    return maker(param)


@dataclass(frozen=True)
class TwoQubitPauliChannel:
    """Two-qubit Pauli mixture; ``probs[i][j]`` weights ``sigma_i ⊗ sigma_j``."""

    probs: tuple

    def __post_init__(self):
        flat = [p for row in self.probs for p in row]
        _check_probs(flat, 16)
        object.__setattr__(
            self, "probs", tuple(tuple(float(p) for p in row) for row in self.probs)
        )

    @classmethod
    def correlated_depolarizing(cls, p_prime: float) -> "TwoQubitPauliChannel":
        """Identity with weight p' + (1-p')/16, each other pair (1-p')/16."""
        _range_check(p_prime)
        q = (1.0 - p_prime) / 16.0
        rows = [[q] * 4 for _ in range(4)]
        rows[0][0] += p_prime
        return cls(tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class GateNoiseModel:
    """Noise attached to every two-qubit gate of a protocol.

    kind ``"local"``: single-qubit channels on both gate qubits before the
    perfect gate — either one shared ``channel`` or ``channels_by_color``
    assigning a channel per vertex-color class (used for the restricted
    bit-flip/phase-flip model on two-colorable graphs).
    kind ``"correlated"``: one fully correlated two-qubit mixture.
    """

    kind: str
    channel: Optional[PauliChannel] = None
    channels_by_color: Optional[tuple] = None
    two_qubit: Optional[TwoQubitPauliChannel] = None
    param: Optional[float] = None

    def __post_init__(self):
        if self.kind == "local":
            if (self.channel is None) == (self.channels_by_color is None):
                raise ValueError("local kind needs exactly one channel payload")
        elif self.kind == "correlated":
            if self.two_qubit is None:
                raise ValueError("correlated kind needs a two-qubit channel")
        else:
            raise ValueError(f"unknown gate-noise kind {self.kind!r}")

    @classmethod
    def perfect(cls) -> "GateNoiseModel":
        return cls("local", channel=PauliChannel.identity(), param=1.0)

    @classmethod
    def local(cls, channel: PauliChannel, param: Optional[float] = None) -> "GateNoiseModel":
        return cls("local", channel=channel, param=param)

    @classmethod
    def depolarizing(cls, p: float) -> "GateNoiseModel":
        return cls("local", channel=PauliChannel.depolarizing(p), param=p)

    @classmethod
    def binary(cls, p_xz: float) -> "GateNoiseModel":
        """Restricted model: D_x on color-0 (set A) qubits, D_z on color-1."""
        return cls(
            "local",
            channels_by_color=(PauliChannel.bitflip(p_xz), PauliChannel.phaseflip(p_xz)),
            param=p_xz,
        )

    @classmethod
    def correlated(cls, p_prime: float) -> "GateNoiseModel":
        return cls(
            "correlated",
            two_qubit=TwoQubitPauliChannel.correlated_depolarizing(p_prime),
            param=p_prime,
        )

    def qubit_channel(self, color_index: int = 0) -> PauliChannel:
        if self.kind != "local":
            raise ValueError("per-qubit channel undefined for correlated kind")
        if self.channels_by_color is None:
            return self.channel
        if color_index >= len(self.channels_by_color):
            raise ValueError(
                f"no channel assigned to color {color_index} "
                f"({len(self.channels_by_color)} classes configured)"
            )
        return self.channels_by_color[color_index]

    @property
    def is_perfect(self) -> bool:
        if self.kind == "correlated":
            return self.two_qubit.probs[0][0] == 1.0
        chans = self.channels_by_color or (self.channel,)
        return all(c.is_identity for c in chans)


def noisy_cnot_mixture(model: GateNoiseModel, source: int, target: int,
                       n: int, source_color: int = 0, target_color: int = 0):
    """Pauli-mixture decomposition of a noisy CNOT on ``n`` qubits.

    Returns a list of ``(weight, PauliString)`` terms to be applied before a
    perfect CNOT ``source -> target``.
    """
    if source == target:
        raise ValueError("source and target must differ")
    for q in (source, target):
        if not 1 <= q <= n:
            raise ValueError(f"qubit {q} out of range")
    terms = []
    if model.kind == "local":
        cs = model.qubit_channel(source_color).probs
        ct = model.qubit_channel(target_color).probs
        for i, ls in enumerate(LETTERS):
            for j, lt in enumerate(LETTERS):
                w = cs[i] * ct[j]
                if w:
                    p = PauliString.single(n, source, ls) * PauliString.single(n, target, lt)
                    terms.append((w, p))
    else:
        for i, ls in enumerate(LETTERS):
            for j, lt in enumerate(LETTERS):
                w = model.two_qubit.probs[i][j]
                if w:
                    p = PauliString.single(n, source, ls) * PauliString.single(n, target, lt)
                    terms.append((w, p))
    return terms


@dataclass(frozen=True)
class GlobalDepolarizing:
    """Mix with the maximally mixed state: keep with probability p_tilde."""

    p_tilde: float
    n: int

    def __post_init__(self):
        _range_check(self.p_tilde)

    def apply_diagonal(self, coeffs: np.ndarray) -> np.ndarray:
        return self.p_tilde * coeffs + (1.0 - self.p_tilde) / coeffs.size

    def apply_dense(self, rho: np.ndarray) -> np.ndarray:
        d = rho.shape[0]
        return self.p_tilde * rho + (1.0 - self.p_tilde) * np.eye(d) / d


# ---------------------------------------------------------------------------
# Clifford conjugation of Pauli strings
# ---------------------------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)

GATE_MATRICES = {
    "H": _H,
    # sqrt(-i X) and sqrt(i Z): the local-complementation Cliffords
    "SX": (_I2 - 1j * _X) / math.sqrt(2),
    "SZ": (_I2 + 1j * _Z) / math.sqrt(2),
    "X": _X,
    "Z": _Z,
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
    ),  # control = low qubit (first of the qubit pair)
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}

_GATE_ALIASES = {"sqrt-x": "SX", "sqrt-z": "SZ", "√X": "SX", "√Z": "SZ"}


def _small_pauli(xbits, zbits, phase, k):
    return PauliString(k, xbits, zbits, phase).matrix()


def conjugate_pauli_through_clifford(p: PauliString, gate: str, qubits) -> PauliString:
    """Return ``P'`` with ``G P = P' G`` (phase tracked exactly).

    ``gate`` is one of CNOT, CZ, H, sqrt-x (√(-iX)), sqrt-z (√(iZ));
    ``qubits`` lists the gate's qubits (CNOT order: control, target).
    """
    name = _GATE_ALIASES.get(gate, gate.upper())
    if name not in GATE_MATRICES:
        raise ValueError(f"unsupported gate {gate!r}")
    U = GATE_MATRICES[name]
    qubits = list(qubits)
    k = len(qubits)
    if U.shape[0] != 1 << k:
        raise ValueError(f"gate {gate} expects {int(np.log2(U.shape[0]))} qubits")
    # restrict P to the gate's qubits (phase carried along)
    xs = zs = 0
    for i, q in enumerate(qubits):
        xs |= ((p.xmask >> (q - 1)) & 1) << i
        zs |= ((p.zmask >> (q - 1)) & 1) << i
    sub = PauliString(k, xs, zs, p.phase).matrix()
    conj = U @ sub @ U.conj().T
    # decompose: the conjugate of a Pauli under these gates is again a Pauli
    dim = 1 << k
    for xb in range(dim):
        for zb in range(dim):
            basis = _small_pauli(xb, zb, 0, k)
            c = np.trace(basis.conj().T @ conj) / dim
            if abs(abs(c) - 1.0) < 1e-9:
                ph = int(round(np.angle(c) / (np.pi / 2))) % 4
                xm, zm = p.xmask, p.zmask
                for i, q in enumerate(qubits):
                    bit = 1 << (q - 1)
                    xm = (xm & ~bit) | (((xb >> i) & 1) << (q - 1))
                    zm = (zm & ~bit) | (((zb >> i) & 1) << (q - 1))
                return PauliString(p.n, xm, zm, ph)
    raise ValueError("conjugate is not a Pauli string")  # pragma: no cover
