"""
Central config: numerical tolerances, resource caps and protocol defaults.
Update the caps through the environment if a machine can take more.
"""
import os
from dataclasses import dataclass

# Hermiticity / positivity / normalization checks (absolute, max-entry or eigenvalue)
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-10
UNITARY_TOL = 1e-10

# Eigenvalues below SUPPORT_CUTOFF * (largest eigenvalue) count as exactly zero
SUPPORT_CUTOFF = 1e-12

# Entropy minimizer
ENTROPY_TOL = 1e-10
ENTROPY_MAX_ITER = 500

# Protocol defaults
DEFAULT_ALPHA = 2.0
DEFAULT_DELTA = 0.1
DEFAULT_NUM_U_CANDIDATES = 8
DEFAULT_RANDOM_RANK = 2

# Bounds: exp{...} read in base 2 so log|F|, log M and entropies share the bit unit
EXP_BASE = 2.0
VACUOUS_LEVEL = 2.0   # trace-norm distance never exceeds this


@dataclass(frozen=True)
class ResourceCaps:
    max_density_dim: int = 4096      # density matrices up to 4096 x 4096
    max_pure_dim: int = 2 ** 20      # state vectors up to 2^20 amplitudes


DEFAULT_CAPS = ResourceCaps(
    max_density_dim=int(os.getenv("DECOUPLE_MAX_DENSITY_DIM", 4096)),
    max_pure_dim=int(os.getenv("DECOUPLE_MAX_PURE_DIM", 2 ** 20)),
)

# Sweep record schema (fixed order; an `error` column is appended on output)
CSV_COLUMNS = [
    "run_id", "seed", "n", "dimA", "dimB", "dimR", "dimE", "alpha", "delta",
    "log2_F", "log2_M", "eps_emp", "eps_bound", "theta_emp", "theta_bound",
    "erasure_err", "marginal_err", "decon_err", "chain_bound_emp",
    "chain_bound_theory", "rate", "rate_formula", "cmi_target", "vacuous_flag",
    "duration_ms",
]

# Builtin state names understood by the harness
BUILTIN_STATES = ("ghz", "max-entangled-AR", "product", "classical", "random")
