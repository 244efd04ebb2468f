"""Finite-state Markov-driven random dynamical systems.

Decides irreducibility and strict irreducibility of driving kernels,
ergodicity of the induced step skew products, synthesizes the two Id/swap
counterexample constructions, and computes the limits of random ergodic
averages both exactly and by reproducible Monte Carlo.
"""

from .dynamics import (
    FiniteMeasureSpace,
    MeasurePreservingMap,
    TransformationFamily,
    conditional_expectation,
    family_invariant_partition,
    is_family_ergodic,
    uniform_space,
    validate_map,
)
from .ergodic import (
    ConvergenceTrace,
    PathSampler,
    TraceRow,
    birkhoff_average,
    cesaro_partial_averages,
    convergence_report,
    exact_birkhoff_limit,
    exact_cesaro_limit,
    expectation_operator,
    orbit_occupancy,
    sample_path,
    substream,
    system_digest,
)
from .errors import (
    DimensionMismatch,
    GenerationFailed,
    InternalInconsistency,
    InvalidPairState,
    MultipleStationary,
    NotApplicable,
    NotInvariant,
    NotMeasurePreserving,
    ParseError,
    RowNotStochastic,
    StartOffSupport,
    TheoremViolation,
    TooLarge,
    ValidationError,
)
from .graphs import Partition
from .kernels import (
    EPS_SUM,
    EPS_ZERO,
    MAX_ENUM_BLOCKS,
    DeterministicSetFamily,
    MarkovSpec,
    ProbVector,
    ReachReport,
    StochasticMatrix,
    deterministic_check,
    deterministic_sets,
    dual_sim_classes,
    is_irreducible,
    is_strictly_irreducible,
    kernel_product,
    reach_set,
    reverse_kernel,
    sim_classes,
    stationary_distribution,
    strict_irreducibility_routes,
    trivial_kernel,
    validate_spec,
)
from .oracles import (
    DISPERSION_THRESHOLD,
    GeneratorConfig,
    ProbeReport,
    brute_force_deterministic_sets,
    brute_force_invariant_sets,
    generate_family,
    generate_space,
    generate_spec,
    statistical_ergodicity_probe,
)
from .skew import (
    ErgodicityReport,
    PairChain,
    SkewSystem,
    build_base_counterexample,
    build_counterexample_family,
    build_pair_chain,
    check_product_structure,
    counterexample_invariant_set,
    invariant_function_basis,
    is_skew_ergodic,
)

__version__ = "0.1.0"
