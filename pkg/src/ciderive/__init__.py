"""Conditional-independence derivations for discrete joint distributions.

The package decides whether a finite joint matrix is a block matrix,
derives step-by-step witnesses that drive a non-block pair toward
independence, and checks the entropy inequalities that link witness
order to common-information rates.
"""

from .construction import (
    ConstructionConfig,
    ConstructionResult,
    NewtonConfig,
    approximate_good,
    bernoulli_encoding,
    block_compose,
    d_epsilon,
    d_epsilon_chain,
    derive_nonblock,
    dyadic_approx,
    eps_sequence,
    positive_nonsingular_witness,
    positive_witness,
    solve_correction,
    stochastic_lift,
)
from .distribution import (
    clamp_information,
    conditional_entropy,
    conditional_mutual_information,
    couple_gamma,
    entropy,
    gamma_from_map,
    marginal,
    mutual_information,
    normalize,
    total_variation,
    validate_coupling,
    validate_distribution,
)
from .errors import (
    BadAxis,
    BadMap,
    BadN,
    CideriveError,
    DegeneratePositivity,
    EmptySupport,
    EpsOutOfRange,
    InvalidCoupling,
    InvalidDistribution,
    IsBlock,
    MassMismatch,
    NegativeEntry,
    NegativeRate,
    NoConvergence,
    NonzeroSum,
    NotBlock,
    NotDyadic,
    NotIndependent,
    NotRMatrix,
    OrderCapExceeded,
    OrderDecrease,
    OutOfRange,
    ParseError,
    RowColNotRank1,
    ShapeMismatch,
    SingularM,
    SumNotOne,
    TooLarge,
    ZeroEntry,
)
from .inequalities import (
    BoundVerdict,
    InfoReport,
    RatePoint,
    SweepResult,
    block_counterexample,
    check_theorem1,
    check_theorem3,
    common_information_bound,
    gamma_sweep,
    generic_rate_bound,
    lemma12_bound,
    order_lower_bound,
    rate_bound,
)
from .io import (
    dumps_matrix,
    dumps_witness,
    load_gamma,
    load_matrix,
    load_witness,
    loads_gamma,
    loads_matrix,
    loads_witness,
    save_matrix,
    save_witness,
)
from .structure import (
    BlockSplit,
    SupportPattern,
    block_split,
    exact_r_complexity,
    is_r_matrix,
    maximal_rectangles,
    r_complexity_bound,
    r_decomposition,
    rank1_split,
    support_pattern,
)
from .witness import (
    AppendedWitness,
    ChainWitness,
    DenseWitness,
    DerivationWitness,
    LiftedWitness,
    MappedWitness,
    PowerWitness,
    PrefixedWitness,
    ProductWitness,
    StepReport,
    ValidationReport,
    independent_witness,
    map_witness,
    pad_witness,
    power_witness,
    product_witness,
    transpose_witness,
    validate_quad,
    validate_witness,
    witness_kind,
)

__version__ = "0.1.0"
