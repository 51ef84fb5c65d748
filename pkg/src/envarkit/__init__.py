"""envarkit: envariance decision procedures for bipartite pure states.

The toolkit decides environment-assisted invariance constructively and via
an independent Procrustes oracle, replays the swap/counterswap
probability-equality argument as a rule-based engine with per-assumption
ablation, recovers rational Born weights by fine-graining the environment,
and numerically audits the frame-function normalization condition.
"""

from .derivation import (
    EnvPhase,
    EnvSwap,
    EqualityStore,
    MergeRecord,
    ProbTerm,
    RuleSet,
    StateExpr,
    SystemPhase,
    SystemSwap,
    TermSet,
    born_value,
    equal_probabilities,
    generate_terms,
    numeric_probabilities,
    replay,
    saturate,
)
from .envariance import (
    ENVAR_TOL,
    EnvarianceVerdict,
    check_envariance,
    oracle_best_counter,
    phase_transform,
    swap_transform,
)
from .errors import (
    DimensionMismatch,
    EnvarkitError,
    IncompleteDerivation,
    IndexOutOfRange,
    NoRationalFit,
    NonOrthonormalBasis,
    NotNormalized,
    NotUnitary,
    ParseError,
    UnevenCoefficients,
    UnknownTerm,
    WeightMismatch,
    ZeroState,
)
from .finegrain import (
    FineGrainedState,
    RationalWeights,
    born_via_counting,
    equal_branch_derivation,
    fine_grain,
    rationalize,
)
from .gleason import (
    AUDIT_TOL,
    AuditReport,
    BasisSample,
    CustomFrame,
    FrameFunction,
    PowerOverlapFrame,
    QuadraticFrame,
    audit,
    frame_sum,
    random_basis,
)
from .schmidt import (
    DEGENERACY_TOL,
    SCHMIDT_CUTOFF,
    SchmidtDecomposition,
    decomposition_from_json,
    decomposition_to_json,
    degeneracy_blocks,
    is_even,
    reconstruct,
    schmidt,
)
from .states import (
    NORM_TOL,
    UNITARY_TOL,
    BipartiteState,
    LocalUnitary,
    TripartiteState,
    apply_env,
    apply_system,
    equal_up_to_global_phase,
    load_state,
    make_state,
    premeasure,
    reduced_density_system,
    save_state,
    state_from_json,
    state_to_json,
)

__version__ = "0.1.0"
