"""Laplace and bi-Laplace boundary value problems on finite directed networks."""

from .exceptions import NetworkError, ResidualError, SingularSystemError, SolvabilityError
from .network import (
    Network,
    SubNetwork,
    builtin_example,
    cycle,
    funnel_b,
    load_network,
    make_subnetwork,
    parse_network,
    path_a,
    random_network,
    save_network,
    serialize_network,
    strongly_connected,
)
from .markov import (
    BoundaryApparatus,
    GreenKernel,
    TransitionSystem,
    boundary_chain,
    boundary_chain_resolvent,
    build_transition,
    funnel_transition,
    green_restricted,
    hitting_matrix,
    induced_boundary,
    is_reversible,
    reverse,
    stationary,
    subnetwork_transition,
)
from .laplace import (
    BalayageResult,
    NormalDerivativeKind,
    PotentialTransform,
    RobinTransform,
    apply_laplacian,
    balayage,
    dirichlet_to_neumann,
    harmonic_extension,
    normal_derivative,
    potential_transform,
    robin_transform,
    solve_dirichlet,
    solve_dirichlet_potential,
    solve_mixed,
    solve_neumann,
    solve_poisson,
    solve_poisson_potential,
    solve_robin,
)
from .bilaplace import (
    BiharmonicKernel,
    BiLaplaceBlocks,
    PlateCondition,
    TransferMatrix,
    bi_blocks,
    bi_d2n,
    bi_n2d,
    bineumann_condition,
    biharmonic_green,
    plate1_condition,
    r_matrix,
    solve_bidirichlet,
    solve_bineumann,
    solve_iterated_dirichlet,
    solve_iterated_poisson,
    solve_plate1,
    solve_plate2,
    transfer_matrix,
)
from .simulate import (
    EstimateReport,
    estimate_boundary_chain,
    estimate_boundary_occupation,
    estimate_green,
    estimate_hitting,
    sample_step,
)

__version__ = "0.1.0"
