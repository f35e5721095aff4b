"""qlyap: Lyapunov feedback control of finite-dimensional quantum systems.

Simulates the coupled plant/target density-matrix dynamics under the
trace-form feedback law, characterizes the set where the feedback field
vanishes identically, and classifies the stability of every diagonal
rearrangement of a stationary target.
"""

from .dynamics import (
    SimulationConfig,
    Trajectory,
    distance_to_orbit,
    distance_to_target,
    feedback_control,
    interaction_picture,
    lyapunov_value,
    max_lyapunov_value,
    orbit_discretization_bound,
    simulate,
)
from .linalg import (
    GeneratorBasis,
    adjoint_matrix,
    build_generator_basis,
    commutator,
    from_bloch,
    hs_inner,
    hs_norm,
    matrix_exponential,
    spectrum,
    su_coordinates,
    to_bloch,
    validate_density,
)
from .presets import PRESET_NAMES, Scenario, get_preset, list_presets, matched_ideal
from .scenarios import (
    BatchResult,
    RunSummary,
    ScenarioConfig,
    analyze_command,
    haar_unitary,
    permutation_states,
    random_isospectral,
    run_batch,
    run_scenario,
    summarize,
)
from .stability import (
    CriticalPoint,
    FixedPointReport,
    classify_fixed_point,
    enumerate_critical_points,
    linearization,
    restrict_to_tangent,
    stability_survey,
)
from .structure import (
    ControlSystem,
    SpanReport,
    StructureReport,
    a_tilde_rank,
    ad_bracket_sequence,
    analyze_structure,
    bracket_span,
    invariant_set_member,
    pseudo_pure_invariant_check,
    vandermonde_matrix,
    vandermonde_rank,
)

__version__ = "0.1.0"

__all__ = [
    "BatchResult",
    "ControlSystem",
    "CriticalPoint",
    "FixedPointReport",
    "GeneratorBasis",
    "PRESET_NAMES",
    "RunSummary",
    "Scenario",
    "ScenarioConfig",
    "SimulationConfig",
    "SpanReport",
    "StructureReport",
    "Trajectory",
    "a_tilde_rank",
    "ad_bracket_sequence",
    "adjoint_matrix",
    "analyze_command",
    "analyze_structure",
    "bracket_span",
    "build_generator_basis",
    "classify_fixed_point",
    "commutator",
    "distance_to_orbit",
    "distance_to_target",
    "enumerate_critical_points",
    "feedback_control",
    "from_bloch",
    "get_preset",
    "haar_unitary",
    "hs_inner",
    "hs_norm",
    "interaction_picture",
    "invariant_set_member",
    "linearization",
    "list_presets",
    "lyapunov_value",
    "matched_ideal",
    "matrix_exponential",
    "max_lyapunov_value",
    "orbit_discretization_bound",
    "permutation_states",
    "pseudo_pure_invariant_check",
    "random_isospectral",
    "restrict_to_tangent",
    "run_batch",
    "run_scenario",
    "simulate",
    "spectrum",
    "stability_survey",
    "su_coordinates",
    "summarize",
    "to_bloch",
    "validate_density",
    "vandermonde_matrix",
    "vandermonde_rank",
]
