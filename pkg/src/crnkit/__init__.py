"""Exact moment systems and product-form stationary laws for mass-action reaction networks."""
from .cbn import (
    CbEquilibrium,
    ConditionalDistribution,
    EmptyFiber,
    FiberNotFinite,
    NoCertificate,
    PartitionTable,
    Unbalanced,
    conditional_distribution,
    conditional_factorial_moment,
    conditional_marginal,
    conditional_moments,
    enumerate_partition_function,
    partition_function,
    solve_complex_balance,
    sscme_residual,
    stationary_distribution,
    verify_complex_balance,
)
from .moments import (
    CapExceeded,
    LinearMomentSystem,
    MomentBasis,
    MomentValues,
    NotClosed,
    assemble,
    closure,
    moment_derivative,
    moment_system,
    steady_state,
    transient,
)
from .network import (
    ConservationBasis,
    CrnError,
    FfnCertificate,
    InvalidNetwork,
    NotFFN,
    Reaction,
    ReactionNetwork,
    StoichMatrix,
    StructureSummary,
    ZeroColumn,
    complexes,
    conservation_basis,
    deficiency,
    ffn_certificate,
    linkage_classes,
    reduce_by_conservation,
    stoichiometry,
    structure,
    weak_reversibility,
)
from .parse import ParseError, format_network, load_network, parse_network
from .polynomial import Poly
from .serialize import SchemaError, from_json, to_json
from .ssa import SsaEnsemble, Trajectory, simulate_ensemble, ssa_run

__version__ = "0.1.0"
