"""Graphs, colorings, local complementation and graph-state index algebra.

Conventions
-----------
Vertices are labeled ``1..n``.  A basis index ``mu`` is packed into an
integer with bit ``v-1`` holding the deviation bit of vertex ``v``
(little-endian).  The graph-state basis is ``|mu> = prod_j (Z_j)^{mu_j} |G>``
where ``|G>`` is the graph state of ``G``; the correlation operator
``K_a = X_a prod_{b in N_a} Z_b`` satisfies ``K_a |mu> = (-1)^{mu_a} |mu>``.

Pauli strings are stored symplectically (``P = i^phase * X^x Z^z``) so that
phases can be tracked exactly by the dense oracle while the diagonal engines
use only the XOR masks produced by :func:`pauli_index_action`.
"""

from __future__ import annotations

import functools
import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .tolerances import DENSE_QUBIT_LIMIT

__all__ = [
    "Graph",
    "Coloring",
    "PauliString",
    "neighborhood",
    "color",
    "local_complement",
    "lc_transform_index",
    "pauli_index_action",
    "correlation_operator",
    "graph_state_dense",
    "graph_basis_state_dense",
    "star_graph",
    "ring_graph",
    "line_graph",
    "cluster_ring_resource_graph",
    "three_colorable_resource_graph",
    "graph_from_name",
]


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``1..n``.

    Parameters
    ----------
    n : int
        Vertex count (>= 1).
    edges : frozenset of tuple
        Unordered pairs ``(a, b)`` with ``a < b``, no self-loops.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one vertex, got n={self.n}")
        canon = set()
        for e in self.edges:
            a, b = e
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (1 <= a <= self.n and 1 <= b <= self.n):
                raise ValueError(f"edge {e} out of range 1..{self.n}")
            canon.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(canon))

    def neighborhood(self, a: int) -> frozenset:
        return neighborhood(self, a)

    def neighbor_mask(self, a: int) -> int:
        """Packed-bit mask of the neighborhood of ``a``."""
        return _neighbor_masks(self)[a - 1]

    def degree(self, a: int) -> int:
        return len(self.neighborhood(a))

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    # -- edge-list text serialization (first line n, then "a b" per line) --

    def to_edge_list_text(self) -> str:
        lines = [str(self.n)]
        lines += [f"{a} {b}" for a, b in sorted(self.edges)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list_text(cls, text: str) -> "Graph":
        rows = [ln for ln in text.splitlines() if ln.strip()]
        n = int(rows[0])
        edges = frozenset(tuple(map(int, ln.split())) for ln in rows[1:])
        return cls(n, edges)


def neighborhood(g: Graph, a: int) -> frozenset:
    """Return ``{b | {a,b} in E}``."""
    if not 1 <= a <= g.n:
        raise ValueError(f"vertex {a} out of range 1..{g.n}")
    return frozenset(b if x == a else x for x, b in g.edges if a in (x, b))


@functools.lru_cache(maxsize=None)
def _neighbor_masks(g: Graph) -> tuple:
    masks = [0] * g.n
    for a, b in g.edges:
        masks[a - 1] |= 1 << (b - 1)
        masks[b - 1] |= 1 << (a - 1)
    return tuple(masks)


@dataclass(frozen=True)
class Coloring:
    """Proper vertex coloring; ``colors[v-1]`` is the color index of ``v``."""

    colors: tuple
    k: int

    def __post_init__(self):
        if self.k < 1 or set(self.colors) - set(range(self.k)):
            raise ValueError("color indices must lie in 0..k-1")

    @property
    def n(self) -> int:
        return len(self.colors)

    def class_mask(self, c: int) -> int:
        """Packed-bit mask over vertices with color ``c``."""
        m = 0
        for i, ci in enumerate(self.colors):
            if ci == c:
                m |= 1 << i
        return m

    def class_vertices(self, c: int) -> tuple:
        return tuple(i + 1 for i, ci in enumerate(self.colors) if ci == c)

    @property
    def is_two_colorable(self) -> bool:
        return self.k == 2


def color(g: Graph) -> Coloring:
    """Properly color ``g``; two colors when bipartite, else greedy.

    Bipartite components are 2-colored by BFS with the class containing
    vertex 1 labeled 0.  Non-bipartite graphs get a greedy coloring in order
    of ascending degree (ties by label), which is deterministic.
    """
    cols = [-1] * g.n
    bipartite = True
    for start in range(1, g.n + 1):
        if cols[start - 1] != -1:
            continue
        cols[start - 1] = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in g.neighborhood(v):
                if cols[w - 1] == -1:
                    cols[w - 1] = 1 - cols[v - 1]
                    queue.append(w)
                elif cols[w - 1] == cols[v - 1]:
                    bipartite = False
        if not bipartite:
            break
    if bipartite:
        return Coloring(tuple(cols), 2 if g.n > 1 else 1)

    order = sorted(range(1, g.n + 1), key=lambda v: (g.degree(v), v))
    cols = [-1] * g.n
    for v in order:
        used = {cols[w - 1] for w in g.neighborhood(v) if cols[w - 1] != -1}
        c = 0
        while c in used:
            c += 1
        cols[v - 1] = c
    return Coloring(tuple(cols), max(cols) + 1)


def local_complement(g: Graph, a: int) -> Graph:
    """Complement the subgraph induced by the neighborhood of ``a``."""
    nbrs = sorted(g.neighborhood(a))
    pairs = {(x, y) for x, y in itertools.combinations(nbrs, 2)}
    edges = set(g.edges) ^ pairs
    return Graph(g.n, frozenset(edges))


def lc_transform_index(mu: int, g: Graph, a: int) -> int:
    """Index permutation induced by local complementation at ``a``.

    ``mu'_b = mu_a xor mu_b`` for ``b`` in the neighborhood of ``a``;
    self-inverse for fixed ``a`` and graph.
    """
    if (mu >> (a - 1)) & 1:
        return mu ^ g.neighbor_mask(a)
    return mu


# ---------------------------------------------------------------------------
# Pauli strings
# ---------------------------------------------------------------------------

_LETTER_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class PauliString:
    """n-qubit Pauli operator ``i^phase * X^xmask Z^zmask``.

    ``xmask``/``zmask`` use the packed-bit vertex convention; ``phase`` is an
    exponent of ``i`` modulo 4.  The letter ``Y`` on one qubit corresponds to
    x-bit and z-bit both set plus one unit of phase (``Y = i X Z``).
    """

    n: int
    xmask: int = 0
    zmask: int = 0
    phase: int = 0

    def __post_init__(self):
        lim = 1 << self.n
        if not (0 <= self.xmask < lim and 0 <= self.zmask < lim):
            raise ValueError("mask out of range for n qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_letters(cls, letters: str) -> "PauliString":
        x = z = 0
        phase = 0
        for i, ch in enumerate(letters.upper()):
            xi, zi = _LETTER_XZ[ch]
            x |= xi << i
            z |= zi << i
            phase += xi & zi
        return cls(len(letters), x, z, phase)

    @classmethod
    def single(cls, n: int, v: int, letter: str) -> "PauliString":
        xi, zi = _LETTER_XZ[letter.upper()]
        return cls(n, xi << (v - 1), zi << (v - 1), xi & zi)

    @property
    def letters(self) -> str:
        table = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        return "".join(
            table[((self.xmask >> i) & 1, (self.zmask >> i) & 1)]
            for i in range(self.n)
        )

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("length mismatch")
        # X^x1 Z^z1 X^x2 Z^z2 = (-1)^{z1.x2} X^{x1^x2} Z^{z1^z2}
        sign = bin(self.zmask & other.xmask).count("1") & 1
        return PauliString(
            self.n,
            self.xmask ^ other.xmask,
            self.zmask ^ other.zmask,
            self.phase + other.phase + 2 * sign,
        )

    @property
    def weight(self) -> int:
        return bin(self.xmask | self.zmask).count("1")

    def matrix(self) -> np.ndarray:
        """Dense matrix (oracle use; ``n`` capped by the dense limit)."""
        if self.n > DENSE_QUBIT_LIMIT:
            raise ValueError("dense limit exceeded")
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Z = np.array([[1, 0], [0, -1]], dtype=complex)
        I = np.eye(2, dtype=complex)
        m = np.array([[1]], dtype=complex)
        for i in range(self.n):  # vertex 1 least significant -> kron from left
            xi = (self.xmask >> i) & 1
            zi = (self.zmask >> i) & 1
            op = (X if xi else I) @ (Z if zi else I)
            m = np.kron(op, m)
        return (1j ** self.phase) * m


def pauli_index_action(p: PauliString, g: Graph) -> int:
    """XOR mask m with ``P |mu> ∝ |mu ^ m>`` in the graph basis of ``g``.

    Z on vertex j flips bit j; X on vertex a flips the bits of N_a; Y on a
    flips bit a and the bits of N_a.  Signs are dropped (irrelevant for
    diagonal mixtures).
    """
    if p.n != g.n:
        raise ValueError("length mismatch")
    mask = p.zmask
    x = p.xmask
    while x:
        low = x & -x
        mask ^= g.neighbor_mask(low.bit_length())
        x ^= low
    return mask


def correlation_operator(g: Graph, a: int) -> PauliString:
    """Stabilizer generator ``K_a``: X on ``a``, Z on its neighborhood."""
    if not 1 <= a <= g.n:
        raise ValueError(f"vertex {a} out of range")
    return PauliString(g.n, 1 << (a - 1), g.neighbor_mask(a))


def graph_state_dense(g: Graph) -> np.ndarray:
    """Amplitudes of ``|G> = prod_edges CZ |+...+>`` (dense oracle only)."""
    if g.n > DENSE_QUBIT_LIMIT:
        raise ValueError("dense limit exceeded")
    x = np.arange(1 << g.n)
    signs = np.zeros(1 << g.n, dtype=np.int64)
    for a, b in g.edges:
        signs += ((x >> (a - 1)) & 1) & ((x >> (b - 1)) & 1)
    amp = ((-1.0) ** (signs & 1)) / np.sqrt(2.0 ** g.n)
    return amp.astype(complex)


def graph_basis_state_dense(g: Graph, mu: int) -> np.ndarray:
    """Amplitudes of the graph-basis state ``|mu> = Z^mu |G>``."""
    amp = graph_state_dense(g)
    x = np.arange(1 << g.n)
    par = np.zeros(1 << g.n, dtype=np.int64)
    m = mu
    while m:
        low = m & -m
        par += (x >> (low.bit_length() - 1)) & 1
        m ^= low
    return amp * ((-1.0) ** (par & 1))


# ---------------------------------------------------------------------------
# Named graphs
# ---------------------------------------------------------------------------

def star_graph(n: int) -> Graph:
    """Star with hub vertex 1 and legs 2..n (GHZ-type resource)."""
    return Graph(n, frozenset((1, v) for v in range(2, n + 1)))


def ring_graph(n: int) -> Graph:
    edges = {(v, v + 1) for v in range(1, n)} | {(1, n)}
    return Graph(n, frozenset(edges))


def line_graph(n: int) -> Graph:
    return Graph(n, frozenset((v, v + 1) for v in range(1, n)))


def cluster_ring_resource_graph() -> Graph:
    """5-ring code qubits 1..5 plus read-in hub 6 joined to all of them."""
    edges = set(ring_graph(5).edges) | {(v, 6) for v in range(1, 6)}
    return Graph(6, frozenset(edges))


def three_colorable_resource_graph() -> Graph:
    """Three-colorable 6-qubit graph; local complementation at vertex 1
    turns it into :func:`cluster_ring_resource_graph` and vice versa."""
    return local_complement(cluster_ring_resource_graph(), 1)


def graph_from_name(name: str) -> Graph:
    """Resolve CLI graph names like ``star:4``, ``ring:5``, ``line:5``."""
    if name == "cluster-ring-resource":
        return cluster_ring_resource_graph()
    if name == "three-colorable-resource":
        return three_colorable_resource_graph()
    if ":" in name:
        kind, num = name.split(":", 1)
        n = int(num)
        maker = {"star": star_graph, "ring": ring_graph, "line": line_graph}.get(kind)
        if maker is not None:
            return maker(n)
    raise ValueError(f"unknown graph name: {name!r}")
