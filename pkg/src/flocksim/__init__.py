"""Deterministic multi-vehicle path-following simulation.

Fixed-wing kinematics under gusty wind, look-ahead pursuit guidance,
sampling-based obstacle replanning, and leaderless arrival-time consensus
over a range-limited network, plus a scenario harness and CLI.
"""

__version__ = "0.1.0"

from .coordination import (
    CoordinationGains,
    TimeIndex,
    consensus_rate,
    speed_command,
    time_index,
)
from .dynamics import (
    GRAVITY,
    Commands,
    Disturbance,
    NO_DISTURBANCE,
    UavLimits,
    UavState,
    WindModel,
    sample_disturbance,
    step_autopilot,
    step_kinematics,
    wrap_angle,
)
from .geo import (
    DemFormatError,
    DemGrid,
    Obstacle,
    OutOfBoundsError,
    Point3,
    dem_elevation,
    distance3,
    lateral_distance,
    load_dem,
    save_dem,
    segment_above_terrain,
    segment_obstructed,
)
from .guidance import (
    ConditionReport,
    DegenerateGeometryError,
    LookAheadAngles,
    PathErrors,
    WaypointPath,
    advance_virtual_target,
    convergence_conditions,
    guidance_commands,
    look_ahead_angles,
    path_errors,
    reference_angles,
    steering_rates,
)
from .harness import (
    AutopilotParams,
    GuidanceParams,
    Metrics,
    PremiseViolation,
    ReplanEvent,
    ReplanFailure,
    ReplanParams,
    RunError,
    RunLog,
    Scenario,
    ScenarioError,
    TickRecord,
    UavSpec,
    WindParams,
    compute_metrics,
    export,
    load_scenario,
    run,
)
from .network import (
    CommConfig,
    CommGraph,
    DropoutWindow,
    NeighborLink,
    ThetaMessage,
    build_topology,
    deliver,
)
from .replanner import (
    CandidateWaypoint,
    FeasibleRegion,
    ReplanError,
    best_detour,
    candidate_cost,
    feasible_region,
    region_contains,
    replan,
    sample_region,
    transit_angles_leg1,
    transit_angles_leg2,
)
from .seeding import derive_rng, derive_seed

__all__ = [
    "__version__",
    # geo
    "Point3",
    "Obstacle",
    "DemGrid",
    "DemFormatError",
    "OutOfBoundsError",
    "lateral_distance",
    "distance3",
    "dem_elevation",
    "segment_obstructed",
    "segment_above_terrain",
    "load_dem",
    "save_dem",
    # dynamics
    "GRAVITY",
    "UavLimits",
    "UavState",
    "Commands",
    "Disturbance",
    "NO_DISTURBANCE",
    "WindModel",
    "sample_disturbance",
    "step_autopilot",
    "step_kinematics",
    "wrap_angle",
    # guidance
    "WaypointPath",
    "LookAheadAngles",
    "PathErrors",
    "ConditionReport",
    "DegenerateGeometryError",
    "advance_virtual_target",
    "reference_angles",
    "look_ahead_angles",
    "steering_rates",
    "guidance_commands",
    "convergence_conditions",
    "path_errors",
    # replanner
    "ReplanError",
    "FeasibleRegion",
    "CandidateWaypoint",
    "feasible_region",
    "region_contains",
    "sample_region",
    "transit_angles_leg1",
    "transit_angles_leg2",
    "candidate_cost",
    "best_detour",
    "replan",
    # network
    "CommConfig",
    "DropoutWindow",
    "NeighborLink",
    "CommGraph",
    "ThetaMessage",
    "build_topology",
    "deliver",
    # coordination
    "CoordinationGains",
    "TimeIndex",
    "time_index",
    "consensus_rate",
    "speed_command",
    # harness
    "Scenario",
    "ScenarioError",
    "RunError",
    "GuidanceParams",
    "ReplanParams",
    "AutopilotParams",
    "WindParams",
    "UavSpec",
    "TickRecord",
    "ReplanEvent",
    "ReplanFailure",
    "PremiseViolation",
    "RunLog",
    "Metrics",
    "load_scenario",
    "run",
    "compute_metrics",
    "export",
    # seeding
    "derive_seed",
    "derive_rng",
]
