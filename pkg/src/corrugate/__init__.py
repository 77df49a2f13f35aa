"""corrugate: C^{1,alpha} isometric immersions in codimension one by
stagewise convex integration, with every identity checked numerically.

The layers, bottom to top:

- basis        primitive-direction decompositions of symmetric matrices
- corrugation  the trigonometric corrugation profiles g1..g4
- fields       grid domains, high-order stencils, mollification, norms
- decompose    the Picard split of a deficit into squared amplitudes
- ibp          the integration-by-parts cancellation cascade
- step         one corrugation (ordinary and sharper flavors)
- stage        deficit delta -> delta_hat through n_star corrugations
- driver       multi-stage schedules, presets, reports, meshes, CLI
"""

from .errors import (
    AlignmentError,
    CorrugateError,
    DeficitTooLarge,
    DimensionError,
    DirectionError,
    DomainTooSmall,
    MeanError,
    NearH0Violation,
    NegativeAmplitude,
    NegativeCoefficient,
    NonImmersion,
    ParamError,
    ResolutionError,
    UnknownPreset,
)
from .basis import (
    DIRECTION_THRESHOLD,
    PsiCoordinates,
    build_basis,
    decompose_L,
    pack_outer,
    phi,
    psi,
    sym_pack,
    sym_unpack,
)
from .corrugation import C_BAR, GAMMA1, GAMMA2, GAMMA3, GAMMA4, TrigPoly, gamma
from .fields import (
    Field,
    GridDomain,
    ck_norm,
    derivative,
    gradient,
    grid_coordinates,
    holder_seminorm,
    induced_metric,
    jacobian,
    mollify,
    norm_report,
    phase_field,
    restrict,
    sample,
    second_derivative_sup,
    sup_norm,
)
from .decompose import KaellenResult, kaellen_decay_bound, kaellen_decompose
from .ibp import IbpResult, identity_residual, identity_tolerance, integrate_by_parts
from .step import (
    ImmersionFrame,
    StepOutcome,
    flat_closed_form_residual,
    frame,
    perturb,
    predicted_metric_rhs,
    step_identity_tolerance,
    step_ordinary,
    step_sharper,
)
from .stage import StageParams, StageReport, run_stage
from .driver import (
    RunConfig,
    RunReport,
    Schedule,
    alpha_limit,
    beta_exponent,
    estimate_holder,
    export_mesh,
    export_report,
    make_preset,
    read_config,
    read_mesh,
    run,
    run_batch,
)

__version__ = "0.1.0"
