"""Safe aerial contact: a funnel-barrier velocity filter, a PnP target
localizer behind a delay-filtered edge link, and a deterministic
closed-loop simulator that ties them together."""

from funnelsim.backend import backend_name
from funnelsim.cbf_safety import (BarrierEvaluation, BarrierParams,
                                  barrier_gradient, barrier_value,
                                  evaluate_barrier, qp_oracle, safety_filter)
from funnelsim.controller import (ControllerGains, VelocityCommand,
                                  control_step, desired_yaw_from_target,
                                  nominal_velocity, yaw_rate_command)
from funnelsim.edge_link import (DelayModel, EdgeChannel, LinkDelays, Outcome,
                                 StampedMessage, channel_run,
                                 latest_valid_estimate, rtt_filter,
                                 sample_delays)
from funnelsim.geometry import (Pose, RelativePosition, RotationMatrix,
                                compose, from_target_frame, inverse,
                                relative_position, to_target_frame)
from funnelsim.mission import (RunReport, ScenarioConfig, compute_metrics,
                               emit_outputs, list_bundled_scenarios,
                               load_scenario, run_scenario)
from funnelsim.perception import (CameraIntrinsics, Correspondence, Detection,
                                  DetectionLevel, DetectorModel, PnPResult,
                                  TargetGeometry, detection_to_correspondences,
                                  project, solve_pnp, synthetic_detect)
from funnelsim.plant import (ArmParams, ContactSurface, PidGains, PlantParams,
                             PlantState, contact_force, step_dynamic,
                             step_kinematic)

__version__ = "0.1.0"

__all__ = [
    "BarrierEvaluation", "BarrierParams", "barrier_gradient", "barrier_value",
    "evaluate_barrier", "qp_oracle", "safety_filter",
    "ControllerGains", "VelocityCommand", "control_step",
    "desired_yaw_from_target", "nominal_velocity", "yaw_rate_command",
    "DelayModel", "EdgeChannel", "LinkDelays", "Outcome", "StampedMessage",
    "channel_run", "latest_valid_estimate", "rtt_filter", "sample_delays",
    "Pose", "RelativePosition", "RotationMatrix", "compose",
    "from_target_frame", "inverse", "relative_position", "to_target_frame",
    "RunReport", "ScenarioConfig", "compute_metrics", "emit_outputs",
    "list_bundled_scenarios", "load_scenario", "run_scenario",
    "CameraIntrinsics", "Correspondence", "Detection", "DetectionLevel",
    "DetectorModel", "PnPResult", "TargetGeometry",
    "detection_to_correspondences", "project", "solve_pnp", "synthetic_detect",
    "ArmParams", "ContactSurface", "PidGains", "PlantParams", "PlantState",
    "contact_force", "step_dynamic", "step_kinematic",
    "backend_name",
    "__version__",
]
