"""Failure-aware multi-robot target tracking under unknown danger zones.

A team of robots tracks moving targets with range-bearing sensors while
hidden sensing-attack and communication-jamming zones knock capabilities
out.  Robots share what they learn about the zones, adapt how boldly
they plan via team-level failure counts, and keep estimating through
chance-constrained keep-out margins, covariance-intersection fusion,
and a circular evasion maneuver that lets teammates triangulate hidden
jammers.
"""

from .coordination import (ObservationBuffers, PlanMode, RobotDirective,
                           build_comm_graph, count_attacked, dispatch,
                           infer_zone_from_circle, observe_peers, on_reconnect)
from .estimation import (EstimationError, FusionResult, apply_stack,
                         block_replicate, ci_fuse, ekf_predict, ekf_update)
from .hazards import (AttackEvent, AttackKind, HazardConfig, HazardState,
                      JamSample, Transition, activation_tick,
                      attack_probability_sensing, jam_condition,
                      sample_centers)
from .motion import (DegenerateGeometryError, Measurement, MeasurementStack,
                     NoiseParams, TargetModel, WaypointPlan,
                     measurement_jacobian, measurement_noise_cov, measure,
                     stack_measurements, step_robot, step_targets, wrap_angle)
from .planner import (AdaptiveWeightConfig, CircleFit, PlanResult, RiskParams,
                      SolverConfig, WeightSet, RISKY_DEFAULT, SAFE_DEFAULT,
                      adaptive_weights, circular_mode_control, comm_margin,
                      erf_inv, estimate_attacker_center, estimate_circle,
                      plan_centralized, plan_individual, plan_vanilla,
                      sensing_margin, tracking_objective)
from .rng import RngStreams, derive_stream_key, make_stream
from .simulator import (RunResult, ScenarioConfig, StepRecord, mse, preset,
                        preset_names, run, trace_metric, validate_scenario)
from .world import (CapState, CommZone, FailureKind, FailureStatus,
                    KnowledgeBase, Provenance, RobotState, SensingZone,
                    TargetEstimate, TargetState, WorldState, ZoneKind,
                    ZoneRecord, copy_world, league_members, merge_knowledge,
                    resolve_records, shared_zone_ids, validate_world)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveWeightConfig", "AttackEvent", "AttackKind", "CapState",
    "CircleFit", "CommZone", "DegenerateGeometryError", "EstimationError",
    "FailureKind", "FailureStatus", "FusionResult", "HazardConfig",
    "HazardState", "JamSample", "KnowledgeBase", "Measurement",
    "MeasurementStack", "NoiseParams", "ObservationBuffers", "PlanMode",
    "PlanResult", "Provenance", "RISKY_DEFAULT", "RiskParams", "RngStreams",
    "RobotDirective", "RobotState", "RunResult", "SAFE_DEFAULT",
    "ScenarioConfig", "SensingZone", "SolverConfig", "StepRecord",
    "TargetEstimate", "TargetModel", "TargetState", "Transition",
    "WaypointPlan", "WeightSet", "WorldState", "ZoneKind", "ZoneRecord",
    "activation_tick", "adaptive_weights", "apply_stack",
    "attack_probability_sensing", "block_replicate", "build_comm_graph",
    "ci_fuse", "circular_mode_control", "comm_margin", "copy_world",
    "count_attacked", "derive_stream_key", "dispatch", "ekf_predict",
    "ekf_update", "erf_inv", "estimate_attacker_center", "estimate_circle",
    "infer_zone_from_circle", "jam_condition", "league_members",
    "make_stream", "measure", "measurement_jacobian",
    "measurement_noise_cov", "merge_knowledge", "mse", "observe_peers",
    "on_reconnect", "plan_centralized", "plan_individual", "plan_vanilla",
    "preset", "preset_names", "resolve_records", "run", "sample_centers",
    "sensing_margin", "shared_zone_ids", "stack_measurements", "step_robot",
    "step_targets", "trace_metric", "tracking_objective", "validate_scenario",
    "validate_world", "wrap_angle",
]
