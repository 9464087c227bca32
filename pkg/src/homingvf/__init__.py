"""Bearing-only visual homing with navigation vector fields.

The home location is given purely as a set of desired bearings to fixed
landmarks.  A tangential field circulates along surfaces of constant
total landmark distance, a normal field adjusts that distance, and a
smooth blend of the two steers either a damped double integrator or a
planar unicycle home while a monitor tracks the pairwise field-of-view
constraint.
"""

from .geometry import (
    AtFocusError,
    CoincidentPointsError,
    ConvergenceError,
    IsonormalCurve,
    LandmarkSet,
    MedianResult,
    SingularHessianError,
    ZeroVectorError,
    bearing,
    bearings_to_foci,
    focus_direction_set_contains,
    gauss_map_inverse,
    geometric_median,
    kellipsoid_contains,
    projection_matrix,
    theta_dist,
    theta_gradient,
    theta_hessian,
    trace_isonormal,
)
from .fields import (
    BumpParams,
    FieldContext,
    FieldSample,
    HomeSpec,
    HomeSpecError,
    NoEligiblePairError,
    PairSelection,
    UndefinedFieldError,
    bump,
    bump_derivative,
    combined_field,
    desired_set_residual,
    fov_margin,
    gains,
    normal_field,
    select_pair,
    tangential_field,
    v_field,
    v_jacobian,
)
from .dynamics import (
    ControlGains,
    DoubleIntegratorState,
    UnicycleCommand,
    UnicycleState,
    di_control,
    di_step,
    unicycle_control,
    unicycle_step,
    wrap_angle,
)
from .sim import (
    FieldGrid,
    RolloutError,
    RolloutSummary,
    Scenario,
    ScenarioError,
    TrajectoryLog,
    load_scenario,
    run_batch,
    run_rollout,
    sample_field_grid,
    scenario_from_dict,
)
from .scenarios import BUNDLED, bundled_scenario_path, load_bundled_scenario

__version__ = "0.1.0"

__all__ = [
    "AtFocusError",
    "BUNDLED",
    "BumpParams",
    "CoincidentPointsError",
    "ControlGains",
    "ConvergenceError",
    "DoubleIntegratorState",
    "FieldContext",
    "FieldGrid",
    "FieldSample",
    "HomeSpec",
    "HomeSpecError",
    "IsonormalCurve",
    "LandmarkSet",
    "MedianResult",
    "NoEligiblePairError",
    "PairSelection",
    "RolloutError",
    "RolloutSummary",
    "Scenario",
    "ScenarioError",
    "SingularHessianError",
    "TrajectoryLog",
    "UndefinedFieldError",
    "UnicycleCommand",
    "UnicycleState",
    "ZeroVectorError",
    "bearing",
    "bearings_to_foci",
    "bump",
    "bundled_scenario_path",
    "load_bundled_scenario",
    "bump_derivative",
    "combined_field",
    "desired_set_residual",
    "di_control",
    "di_step",
    "focus_direction_set_contains",
    "fov_margin",
    "gains",
    "gauss_map_inverse",
    "geometric_median",
    "kellipsoid_contains",
    "load_scenario",
    "normal_field",
    "projection_matrix",
    "run_batch",
    "run_rollout",
    "sample_field_grid",
    "scenario_from_dict",
    "select_pair",
    "tangential_field",
    "theta_dist",
    "theta_gradient",
    "theta_hessian",
    "trace_isonormal",
    "unicycle_control",
    "unicycle_step",
    "v_field",
    "v_jacobian",
    "wrap_angle",
]
