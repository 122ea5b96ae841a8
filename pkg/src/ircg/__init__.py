"""Projection-free convex bilevel optimization.

Minimize an outer objective over the minimizers of an inner objective on a
compact convex domain, touching the domain only through linear minimization
oracles.  The package ships the iteratively regularized conditional gradient
solver with its certificate envelopes, nuclear-norm ball oracles (plain,
tie-broken, and sliced by a half-space), projection baselines, concrete
instances, and a trace/benchmark harness.
"""

from .baselines import (
    BiSGParams,
    CGBiOParams,
    IRPGParams,
    bisg_step,
    cgbio_step,
    cgbio_warm_start,
    initial_baseline_state,
    irpg_step,
    run_baseline,
)
from .errors import (
    ConfigError,
    DegenerateOracle,
    DimensionMismatch,
    DuplicateEntry,
    InfeasibleOracle,
    InsufficientData,
    InvalidDescent,
    InvalidSchedule,
    IrcgError,
    MissingMetadata,
    MissingProjection,
    NonConvergence,
    NonFiniteValue,
    ParseError,
    PreconditionViolated,
    RadiusTooSmall,
    ZeroMatrix,
)
from .instances import (
    Observations,
    gen_synthetic_completion,
    load_ratings,
    make_ball_quadratic,
    make_least_norm,
    make_matrix_completion,
)
from .nuclear import (
    OracleMatrixProblem,
    SncbSolution,
    lmo_nuclear,
    nb_blo,
    nuclear_norm,
    project_nuclear,
    snb_lo,
)
from .numerics import (
    Eigenspace,
    SingularTriplet,
    brent_min,
    leading_eigenspace,
    leading_singular_triplet,
    sigma_max,
    simplex_cap_projection,
)
from .problem import (
    BilevelProblem,
    GradCheckReport,
    InstanceMetadata,
    check_gradients,
    eval_phi,
    grad_phi,
)
from .schedules import (
    RegSchedule,
    ScheduleReport,
    StepRule,
    sigma_at,
    step_closed_loop,
    step_line_search,
    step_open_loop,
    verify_conditions,
)
from .solver import (
    CertificateBounds,
    CertificateConstants,
    SolverConfig,
    SolverState,
    certificate_bounds_at,
    certificate_constants,
    constants_for,
    estimate_g_opt,
    initial_state,
    ircg_step,
    single_level_cg,
    solve,
    z_closed_form,
)
from .trace import (
    RateFit,
    RunTrace,
    compare,
    emit_plot,
    rate_fit,
    read_trace,
    write_trace,
)

__version__ = "0.1.0"
