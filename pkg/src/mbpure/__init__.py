"""mbpure: measurement-based quantum communication with purified resources.

Simulates noisy graph-state generation by multipartite entanglement
purification, quantifies how local the resulting noise is, localizes noise
on GHZ states, and evaluates measurement-based encoded communication
against gate-based and unencoded baselines.

Conventions (shared by every module):
- vertices are 1-based; vertex v owns bit v-1 of packed basis indices
  (little-endian);
- bipartition class A / color 0 is the BFS class containing vertex 1;
- Pauli channel probabilities are ordered (I, X, Y, Z) with the first
  entry the retention probability;
- fidelity between diagonal states is the Uhlmann fidelity
  F = sum_k sqrt(lambda_k omega_k).
"""

from .graphs import (
    Graph,
    Coloring,
    PauliString,
    color,
    graph_from_name,
    graph_state_dense,
    local_complement,
    lc_transform_index,
    star_graph,
    ring_graph,
    line_graph,
    cluster_ring_resource_graph,
    three_colorable_resource_graph,
)
from .noise import PauliChannel, TwoQubitPauliChannel, GateNoiseModel, GlobalDepolarizing
from .diagonal import (
    DiagonalState,
    JointDiagonalState,
    apply_local_channel,
    apply_channel_everywhere,
    fidelity_diagonal,
    fidelity_to_pure,
    depolarize_to_diagonal,
    diagonal_to_dense,
)
from .epp import EppSchedule, EppResult, ProtocolFailure, p_step, allgraph_step, fixed_point
from .symscale import (
    SymmetricCoefficients,
    NotDistillableError,
    noisy_step,
    noisy_purify_fixed_point,
    prepare_initial_ghz,
    prep_threshold,
    encoded_fidelity_curve,
    scaling_threshold,
)
from .localfit import LocalNoiseModel, FitReport, fit_closest_local, deviation_curve
from .localize import (
    GhzStandardForm,
    LocalizationReport,
    twirl_to_standard_form,
    localize_noise,
    localize_state,
)
from .mbqec import (
    Code,
    ResourceState,
    EffectiveMap,
    AmbiguousPatternError,
    repetition_code,
    cluster_ring_code,
    code_by_name,
    derive_correction_table,
    table_rows,
    build_resource,
    effective_map,
    jamiolkowski_fidelity,
    advantage_threshold,
    region_scan,
    by_fidelity_rows,
)

__version__ = "0.1.0"
