"""Centralized numerical tolerances and size limits.

Single knob for all engines: normalization, Hermiticity and positivity
checks, fixed-point convergence, and the dense-oracle size cap.
"""

NORMALIZATION_TOL = 1e-12
HERMITICITY_TOL = 1e-10
PSD_EIG_FLOOR = -1e-10
DENSE_QUBIT_LIMIT = 12

EPP_CONVERGENCE_TOL = 1e-12
EPP_MAX_CYCLES = 500
SUCCESS_PROB_FLOOR = 1e-15

FIT_OUTER_TOL = 1e-11
BISECTION_TOL = 1e-4
MATCH_ROOT_TOL = 1e-10
