"""Convex-geometry toolkit for finite-dimensional quantum resource theories.

Provides state/channel primitives, free-state families with oracle access,
resource measures (relative entropy, global robustness and its smoothed
logarithmic variant), composite hypothesis testing against free-state
families, and a measure-and-prepare conversion protocol with certified
error and free-set-preservation levels.
"""

__version__ = "0.1.0"

from .core import (
    DensityMatrix,
    HermitianOperator,
    SubsystemShape,
    TestOperator,
    bell_state,
    basis_state,
    density_matrix,
    maximally_coherent_state,
    maximally_mixed_state,
    partial_trace,
    permute_subsystems,
    pure_state,
    quantum_relative_entropy,
    random_density_matrix,
    tensor_power,
    tensor_product,
    trace_distance,
    von_neumann_entropy,
)
from .errors import (
    ConfigError,
    DimensionCap,
    NonConvergence,
    RescompError,
    ShapeMismatch,
    SolverFailure,
    TargetIsFree,
)
from .freesets import (
    FreeSetFamily,
    GibbsSingleton,
    IncoherentFamily,
    MaxMixedSingleton,
    PolytopeFamily,
    PPTFamily,
    SingletonFamily,
    validate_closure_properties,
    validate_postulates,
)
from .measures import (
    DEFAULT_CONFIG,
    MeasureResult,
    SolverConfig,
    global_robustness,
    log_robustness,
    regularized_estimate,
    relative_entropy_of_resource,
    smoothed_log_robustness,
    trace_distance_of_resource,
)
from .hypothesis import (
    HypothesisTestResult,
    beta_n,
    beta_singleton,
    stein_exponent_sequence,
)
from .protocol import (
    ProtocolSpec,
    RateExperimentReport,
    build_protocol,
    eps_rng_level,
    rate_experiment,
)
