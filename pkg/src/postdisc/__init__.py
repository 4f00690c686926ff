"""Perfect identification of pure states when the subensemble label arrives late."""
from .core import (
    DEFAULT_TOL,
    EnsembleError,
    EnsemblePair,
    MeasurementTable,
    OverlapData,
    Povm,
    PureEnsemble,
    check_perfect_conditions,
    gram_matrix,
    ket,
    overlap_data,
    projector,
    validate_povm,
)
from .decomp import (
    FCurve,
    Infeasible,
    StochasticFactorization,
    brute_force_membership,
    criterion_2x2,
    decompose,
    decompose_2x2,
    decompose_general,
    downward_closure_check,
    membership_2x2,
    perturb_to_interior,
    perturbation_plan,
)
from .construct import (
    DISTINGUISHABLE,
    NOT_DISTINGUISHABLE,
    UNKNOWN,
    Certificate,
    IsometryMap,
    StandardPair,
    certify_pair,
    check_dimension_bound,
    check_overlap_bound,
    isometry_from_gram,
    naimark_from_rank1_table,
    standard_pair_from_factorization,
    table_from_isometry,
)
from .simulate import (
    MeasurementModel,
    PostProcessor,
    ProtocolStats,
    born_sample,
    derandomize,
    run_protocol,
    theoretical_success_rate,
)

__version__ = "0.1.0"
