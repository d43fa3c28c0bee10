"""Sparse solutions of vertical linear complementarity systems.

Minimizes a capped-l1 surrogate of the l0 norm over the complementarity
set of an affine system via a three-level scheme (sigma-relaxation,
augmented Lagrangian, DC algorithm) and certifies the stationarity class
of the returned point.
"""

from .alm import (
    AlmConfig,
    AlmState,
    AlmTrace,
    al_penalty,
    feasible_point,
    run_alm,
    update_multiplier,
    update_rho,
)
from .bench import BenchConfig, baseline_irl1, baseline_l1, run_bench, write_csv
from .core import (
    CappedL1Params,
    IndexSets,
    VlcsProblem,
    active_theta_set,
    count_zeros,
    d_selector,
    evaluate_gh,
    h_sigma,
    index_sets,
    phi_capped,
    phi_sum,
    read_problem,
    read_truth,
    residual_res,
    write_problem,
    write_truth,
)
from .dca import DcaResult, psi_value, run_dca
from .errors import (
    GenerationError,
    InfeasibleError,
    NonconvergenceError,
    ParameterError,
    PreconditionError,
    SafeguardError,
    VlcsparseError,
)
from .generators import (
    MarketSpec,
    RandomVlcsSpec,
    example31_fixture,
    gen_market_vlcs,
    gen_random_vlcs,
)
from .inner import (
    InnerResult,
    SolverOptions,
    SubproblemSpec,
    WarmStart,
    project_onto_F,
    solve_subproblem,
)
from .outer import (
    OuterConfig,
    SolveReport,
    initial_point,
    nu_schedule,
    sigma_schedule,
    solve_sparse,
)
from .stationarity import (
    ProbeResult,
    StationarityCertificate,
    check_mpcc_licq,
    classify,
    dist_to_solution_set,
    error_bound_probe,
    lifted_residual,
)

__version__ = "0.1.0"
