"""Exact noise localization for GHZ-type (star-graph) diagonal states.

A twirl brings any star-graph diagonal state to the GHZ standard form
(coefficients λ0± on the zero leg pattern, a shared λ_k per nonzero leg
pattern k).  Mixing in separable diagonal states then lifts the pattern
profile onto the one generated by local channels — equal σx/σy noise on the
hub and equal σy/σz noise on each leg, both with retention p — making the
result *exactly* locally describable at a small fidelity cost.

Target profile (m = number of legs), derived from those channels:
    l_k(p) = p^{m+1-k} (1-p)^k + p^k (1-p)^{m+1-k}
summing to 1 over all leg patterns.  Feasibility of the mixing weights
q_k = l_k - Q λ~_k >= 0 forces Q = min_k l_k / λ~_k, maximized over
p ∈ [1/2, 1] (grid seeding + golden-section refinement).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagonal import DiagonalState
from .graphs import Graph
from .tolerances import NORMALIZATION_TOL

__all__ = [
    "GhzStandardForm",
    "LocalizationReport",
    "twirl_to_standard_form",
    "localize_noise",
    "localize_state",
]


def _star_layout(g: Graph):
    """(hub, legs) of a star graph; raises for any other graph."""
    degs = [(g.degree(v), v) for v in range(1, g.n + 1)]
    hubs = [v for d, v in degs if d == g.n - 1]
    legs = [v for d, v in degs if d == 1]
    if g.n < 3 or len(hubs) != 1 or len(legs) != g.n - 1:
        raise ValueError("localization requires a star graph with n >= 3")
    return hubs[0], tuple(sorted(legs))


def _pattern_index_maps(g: Graph):
    """Packed indices of (hub bit, leg pattern) pairs; pattern bit i = leg i."""
    hub, legs = _star_layout(g)
    m = len(legs)
    pats = np.arange(1 << m)
    full = np.zeros(1 << m, dtype=np.int64)
    for i, v in enumerate(legs):
        full |= ((pats >> i) & 1) << (v - 1)
    return hub, legs, full


@dataclass(frozen=True)
class GhzStandardForm:
    """λ0±, plus one shared λ_k per nonzero leg pattern (``lam[0]`` is 0)."""

    n: int
    lam0_plus: float
    lam0_minus: float
    lam: np.ndarray

    def __post_init__(self):
        a = np.array(self.lam, dtype=float)
        a.flags.writeable = False
        if a.shape != (1 << (self.n - 1),):
            raise ValueError("pattern array must have length 2^(N-1)")
        if a[0] != 0.0:
            raise ValueError("lam[0] must be zero (held by lam0_plus/minus)")
        total = self.lam0_plus + self.lam0_minus + 2.0 * a.sum()
        if min(self.lam0_plus, self.lam0_minus, a.min()) < -NORMALIZATION_TOL:
            raise ValueError("negative coefficient")
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"coefficients sum to {total}, not 1")
        object.__setattr__(self, "lam", a)

    @property
    def fidelity(self) -> float:
        """λ0+, the GHZ component weight."""
        return self.lam0_plus


def twirl_to_standard_form(s: DiagonalState) -> GhzStandardForm:
    """Average λ_k^± for k != 0 (the deterministic version of the random
    local-unitary twirl); λ0± and hence the fidelity are untouched."""
    g = s.graph
    hub, legs, full = _pattern_index_maps(g)
    lam_plus = s.coeffs[full]                       # hub bit 0
    lam_minus = s.coeffs[full | (1 << (hub - 1))]   # hub bit 1
    lam = 0.5 * (lam_plus + lam_minus)
    lam[0] = 0.0
    return GhzStandardForm(n=g.n, lam0_plus=float(lam_plus[0]),
                           lam0_minus=float(lam_minus[0]), lam=lam)


def _local_profile(weights: np.ndarray, m: int, p: float) -> np.ndarray:
    """l_k(p) per pattern, for patterns of the given Hamming weights."""
    k = weights
    return p ** (m + 1 - k) * (1 - p) ** k + p ** k * (1 - p) ** (m + 1 - k)


@dataclass(frozen=True)
class LocalizationReport:
    """Outcome of the localization: Q = 1 - sum(q_k) is the weight kept on
    the (twirled) input state; fidelities are λ0+ before/after."""

    p: float
    Q: float
    q: np.ndarray
    fidelity_before: float
    fidelity_after: float
    relative_reduction: float
    feasible: bool


def localize_noise(sf: GhzStandardForm):
    """Mix separable states into a standard-form GHZ state so the result is
    exactly generated by the local hub/leg channels with retention ``p``.

    Returns ``(DiagonalState on the star graph, LocalizationReport)``.
    """
    m = sf.n - 1
    pats = np.arange(1 << m)
    weights = np.array([bin(x).count("1") for x in pats])
    lam_tilde = 2.0 * sf.lam
    lam_tilde[0] = sf.lam0_plus + sf.lam0_minus
    swap = sf.lam0_minus > sf.lam0_plus
    l0p, l0m = ((sf.lam0_minus, sf.lam0_plus) if swap
                else (sf.lam0_plus, sf.lam0_minus))

    positive = lam_tilde > 0

    def q_of(p):
        prof = _local_profile(weights, m, p)
        ratios = prof[positive] / lam_tilde[positive]
        return float(ratios.min())

    # grid seeding + golden-section refinement of max_p Q(p)
    grid = np.linspace(0.5, 1.0, 2001)
    vals = np.array([q_of(p) for p in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = q_of(c1), q_of(c2)
    for _ in range(80):
        if f1 >= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = q_of(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = q_of(c2)
    p_star = 0.5 * (a + b)
    Q = min(q_of(p_star), 1.0)
    feasible = Q > 0.0

    prof = _local_profile(weights, m, p_star)
    q_mix = np.maximum(prof - Q * lam_tilde, 0.0)
    # mixing separable pattern-0 states splits equally on λ0±; the hub's
    # σy branch puts at least (1-p)^{m+1}/2 into λ0-, capping λ0+
    cap = prof[0] - 0.5 * (1.0 - p_star) ** (m + 1)
    f_after = min(Q * l0p + 0.5 * q_mix[0], cap)
    f_before = l0p

    coeffs = np.zeros(1 << sf.n)
    g = _star_for(sf.n)
    hub, legs, full = _pattern_index_maps(g)
    half = 0.5 * prof
    plus = half.copy()
    minus = half.copy()
    plus[0] = f_after
    minus[0] = prof[0] - f_after
    coeffs[full] = plus
    coeffs[full | (1 << (hub - 1))] = minus
    state = DiagonalState(g, coeffs / coeffs.sum())

    report = LocalizationReport(
        p=float(p_star), Q=float(Q), q=q_mix,
        fidelity_before=float(f_before), fidelity_after=float(f_after),
        relative_reduction=float((f_before - f_after) / f_before) if f_before > 0 else 0.0,
        feasible=feasible,
    )
    return state, report


def _star_for(n: int) -> Graph:
    from .graphs import star_graph

    return star_graph(n)


def localize_state(s: DiagonalState):
    """Twirl to standard form, then localize; see :func:`localize_noise`."""
    return localize_noise(twirl_to_standard_form(s))
