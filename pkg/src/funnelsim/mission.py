"""Scenario orchestration: the closed perception-link-control-plant loop,
run metrics, and artifact emission.

A scenario file is a YAML document with explicit units in its key names
so that runs are self-documenting; every constant that the approach
leaves open (gains, rates, funnel shape, tau_max, ...) lives there.
``run_scenario`` advances one global clock at the plant step, runs the
controller and perception at their own (divisor) rates, holds the last
link-accepted target estimate between updates, and terminates at first
tip contact or at the configured duration.

Emitted artifacts: ``run.csv`` (fixed column order, 9 significant
digits), ``summary.json`` (recomputed from the CSV so the two always
agree exactly), and SVG plots of h(t), the error channels, the
commanded velocity, and the trajectory against the funnel boundary.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from funnelsim.backend import kernels
from funnelsim.cbf_safety import BarrierParams, barrier_value
from funnelsim.controller import (ControllerGains, VelocityCommand,
                                  control_step, desired_yaw_from_target)
from funnelsim.edge_link import (DelayModel, EdgeChannel, LinkDelays, Outcome,
                                 export_delivery_log)
from funnelsim.errors import (ConfigError, DegenerateConfigurationError,
                              PlantInstabilityError, PnPNonConvergenceError)
from funnelsim.geometry import (Pose, RotationMatrix, compose, inverse,
                                relative_position)
from funnelsim.perception import (CAMERA_IN_BODY, HEAD_ON_CAMERA_FROM_TARGET,
                                  CameraIntrinsics, DetectorModel,
                                  TargetGeometry, detection_to_correspondences,
                                  solve_pnp, synthetic_detect)
from funnelsim.plant import (ArmParams, ContactSurface, PidGains, PlantParams,
                             PlantState, step_dynamic, step_kinematic)

CSV_COLUMNS = ["t", "px", "py", "pz", "vx", "vy", "vz", "h",
               "ex", "ey", "ez", "epsi", "ux", "uy", "uz", "yawrate",
               "F_contact", "percep_outcome"]

PLANT_VARIANTS = ("kinematic", "dynamic")
PERCEPTION_MODES = ("ground_truth", "estimated")


@dataclass(frozen=True)
class PerceptionConfig:
    mode: str = "ground_truth"
    rate_hz: float = 10.0
    intrinsics: CameraIntrinsics = CameraIntrinsics(500.0, 500.0, 320.0, 240.0)
    camera_mount_xyz: tuple = (0.0, 0.0, 0.0)
    marker: TargetGeometry = TargetGeometry()
    detector: DetectorModel = DetectorModel()
    initial_range_guess: float = 3.0

    def __post_init__(self):
        if self.mode not in PERCEPTION_MODES:
            raise ConfigError(f"perception mode must be one of "
                              f"{PERCEPTION_MODES}, got {self.mode!r}")
        if self.rate_hz <= 0.0:
            raise ConfigError("perception rate must be positive")
        if self.initial_range_guess <= 0.0:
            raise ConfigError("initial range guess must be positive")


@dataclass(frozen=True)
class LinkConfig:
    uplink: DelayModel = DelayModel.constant(0.0)
    downlink: DelayModel = DelayModel.constant(0.0)
    loss_prob: float = 0.0
    tau_max: float = 0.5
    processing_s: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ConfigError("loss_prob must be in [0, 1]")
        if self.tau_max < 0.0 or self.processing_s < 0.0:
            raise ConfigError("tau_max and processing_s must be >= 0")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    duration: float
    seed: int
    plant_variant: str
    plant: PlantParams
    gains: ControllerGains
    control_rate_hz: float
    barrier: BarrierParams
    uav_position: tuple
    uav_yaw: float
    target_position: tuple
    target_yaw: float
    perception: PerceptionConfig = PerceptionConfig()
    link: LinkConfig = LinkConfig()

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ConfigError("duration must be positive")
        if self.control_rate_hz <= 0.0:
            raise ConfigError("control rate must be positive")
        if self.plant_variant not in PLANT_VARIANTS:
            raise ConfigError(f"plant variant must be one of {PLANT_VARIANTS}, "
                              f"got {self.plant_variant!r}")
        _steps_per_period(self.control_rate_hz, self.plant.dt, "control")
        _steps_per_period(self.perception.rate_hz, self.plant.dt, "perception")
        if round(self.duration / self.plant.dt) < 1:
            raise ConfigError("duration shorter than one plant step")


def _steps_per_period(rate_hz: float, dt: float, what: str) -> int:
    exact = 1.0 / (rate_hz * dt)
    steps = round(exact)
    if steps < 1 or abs(exact - steps) > 1e-6:
        raise ConfigError(f"{what} rate {rate_hz} Hz must divide the plant "
                          f"rate {1.0 / dt:.1f} Hz")
    return steps


# ---------------------------------------------------------------------------
# scenario files

def _req(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing key {key!r} in {where}")
    return section[key]


def _delay_model(section: dict, where: str) -> DelayModel:
    kind = _req(section, "kind", where)
    try:
        if kind == "constant":
            return DelayModel.constant(float(_req(section, "value_s", where)))
        if kind == "uniform":
            return DelayModel.uniform(float(_req(section, "low_s", where)),
                                      float(_req(section, "high_s", where)))
        if kind == "exponential":
            return DelayModel.exponential(float(_req(section, "mean_s", where)),
                                          float(section.get("offset_s", 0.0)))
    except ValueError as exc:
        raise ConfigError(f"bad delay model in {where}: {exc}") from exc
    raise ConfigError(f"unknown delay kind {kind!r} in {where}")


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig from a parsed YAML document."""
    try:
        plant_sec = _req(doc, "plant", "scenario")
        pid = plant_sec.get("velocity_pid", {})
        arm_sec = plant_sec.get("arm", {})
        plant = PlantParams(
            mass=float(_req(plant_sec, "mass_kg", "plant")),
            g=float(plant_sec.get("gravity_mps2", 9.81)),
            pid_velocity=PidGains(kp=float(pid.get("kp", 6.0)),
                                  ki=float(pid.get("ki", 2.0)),
                                  kd=float(pid.get("kd", 0.0))),
            f_max=float(plant_sec.get("f_max_n", 30.0)),
            arm=ArmParams(m_a=float(arm_sec.get("mass_kg", 0.05)),
                          d_a=float(arm_sec.get("damping_ns_per_m", 4.0)),
                          k_a=float(arm_sec.get("stiffness_n_per_m", 120.0))),
            dt=float(plant_sec.get("dt_s", 1e-3)),
            tip_offset=float(plant_sec.get("tip_offset_m", 0.3)),
            speed_limit=float(plant_sec.get("speed_limit_mps", 50.0)),
        )

        ctrl = _req(doc, "controller", "scenario")
        kp_raw = np.asarray(_req(ctrl, "kp_per_s", "controller"), dtype=float)
        kp = np.diag(kp_raw) if kp_raw.ndim == 1 else kp_raw
        gains = ControllerGains(
            kp=kp,
            k_psi=float(_req(ctrl, "k_psi_per_s", "controller")),
            v_max=float(_req(ctrl, "v_max_mps", "controller")),
            yaw_rate_max=float(_req(ctrl, "yaw_rate_max_radps", "controller")),
        )

        bar = _req(doc, "barrier", "scenario")
        barrier = BarrierParams(a=float(_req(bar, "a_sqrt_m", "barrier")),
                                gamma=float(bar.get("gamma_per_s", 1.0)),
                                l_eps=float(bar.get("l_eps_m", 1e-3)))

        uav = _req(doc, "uav_start", "scenario")
        target = _req(doc, "target", "scenario")

        percep_sec = doc.get("perception", {})
        cam = percep_sec.get("camera", {})
        marker_sec = percep_sec.get("marker", {})
        det = percep_sec.get("detector", {})
        perception = PerceptionConfig(
            mode=percep_sec.get("mode", "ground_truth"),
            rate_hz=float(percep_sec.get("rate_hz", 10.0)),
            intrinsics=CameraIntrinsics(fx=float(cam.get("fx_px", 500.0)),
                                        fy=float(cam.get("fy_px", 500.0)),
                                        cx=float(cam.get("cx_px", 320.0)),
                                        cy=float(cam.get("cy_px", 240.0))),
            camera_mount_xyz=tuple(cam.get("mount_xyz_m", (0.0, 0.0, 0.0))),
            marker=TargetGeometry(
                half_width=float(marker_sec.get("half_width_m", 0.25)),
                half_height=float(marker_sec.get("half_height_m", 0.25)),
                circle_radius=float(marker_sec.get("circle_radius_m", 0.08))),
            detector=DetectorModel(
                image_width=float(det.get("image_width_px", 640.0)),
                image_height=float(det.get("image_height_px", 480.0)),
                dropout_prob=float(det.get("dropout_prob", 0.0)),
                pixel_jitter=float(det.get("pixel_jitter_px", 0.0)),
                best_area=float(det.get("best_area_px2", 4000.0)),
                better_area=float(det.get("better_area_px2", 1600.0))),
            initial_range_guess=float(percep_sec.get("initial_range_guess_m", 3.0)),
        )

        link_sec = doc.get("link", {})
        link = LinkConfig(
            uplink=_delay_model(link_sec.get("uplink", {"kind": "constant",
                                                        "value_s": 0.0}),
                                "link.uplink"),
            downlink=_delay_model(link_sec.get("downlink", {"kind": "constant",
                                                            "value_s": 0.0}),
                                  "link.downlink"),
            loss_prob=float(link_sec.get("loss_prob", 0.0)),
            tau_max=float(link_sec.get("tau_max_s", 0.5)),
            processing_s=float(link_sec.get("processing_s", 0.0)),
        )

        return ScenarioConfig(
            name=str(doc.get("name", "scenario")),
            duration=float(_req(doc, "duration_s", "scenario")),
            seed=int(_req(doc, "seed", "scenario")),
            plant_variant=str(_req(plant_sec, "variant", "plant")),
            plant=plant,
            gains=gains,
            control_rate_hz=float(ctrl.get("rate_hz", 100.0)),
            barrier=barrier,
            uav_position=tuple(float(v) for v in _req(uav, "position_m", "uav_start")),
            uav_yaw=float(uav.get("yaw_rad", 0.0)),
            target_position=tuple(float(v) for v in _req(target, "position_m", "target")),
            target_yaw=float(target.get("yaw_rad", 0.0)),
            perception=perception,
            link=link,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid scenario document: {exc}") from exc


def load_scenario(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"scenario file {path} is not a mapping")
    return scenario_from_dict(doc)


def bundled_scenario_dir() -> Path:
    return Path(__file__).resolve().parent / "scenarios"


def list_bundled_scenarios() -> dict:
    """Name -> path for the scenario files shipped with the package."""
    return {p.stem: p for p in sorted(bundled_scenario_dir().glob("*.yaml"))}


# ---------------------------------------------------------------------------
# closed loop

@dataclass
class RunSeries:
    t: np.ndarray
    px: np.ndarray
    py: np.ndarray
    pz: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    vz: np.ndarray
    h: np.ndarray
    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray
    epsi: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    uz: np.ndarray
    yawrate: np.ndarray
    f_contact: np.ndarray
    percep_outcome: list

    def __len__(self) -> int:
        return len(self.t)


@dataclass
class RunReport:
    series: RunSeries
    summary: dict
    config: ScenarioConfig
    delivery_log: list = field(default_factory=list)


class _Recorder:
    def __init__(self):
        self.rows = []

    def append(self, t, state, cmd, h, rel, epsi, outcome):
        u = cmd.linear_world
        self.rows.append((t, state.position[0], state.position[1],
                          state.position[2], state.velocity[0],
                          state.velocity[1], state.velocity[2], h,
                          rel.x, rel.y, rel.z, epsi, u[0], u[1], u[2],
                          cmd.yaw_rate, state.contact_force, outcome))

    def series(self) -> RunSeries:
        cols = list(zip(*self.rows)) if self.rows else [[] for _ in CSV_COLUMNS]
        arrays = [np.asarray(c, dtype=float) for c in cols[:17]]
        outcomes = list(cols[17]) if self.rows else []
        return RunSeries(*arrays, outcomes)


class _PerceptionPipeline:
    """Detector + PnP running 'at the edge'; produces world-frame target
    pose estimates from the true relative geometry.  Keeps the previous
    raw estimate as the next initial guess."""

    def __init__(self, config: PerceptionConfig, rng: np.random.Generator):
        self._config = config
        self._rng = rng
        self._body_from_camera = Pose(np.asarray(config.camera_mount_xyz),
                                      RotationMatrix(CAMERA_IN_BODY))
        self._guess = Pose(np.array([0.0, 0.0, config.initial_range_guess]),
                           RotationMatrix(HEAD_ON_CAMERA_FROM_TARGET))

    def estimate(self, t: float, state: PlantState,
                 true_target: Pose) -> Optional[Pose]:
        cfg = self._config
        world_from_body = Pose.from_yaw(state.position, state.yaw)
        world_from_camera = compose(world_from_body, self._body_from_camera)
        camera_from_target = compose(inverse(world_from_camera), true_target)
        detection = synthetic_detect(camera_from_target, cfg.intrinsics,
                                     cfg.marker, cfg.detector, self._rng,
                                     timestamp=t)
        if detection is None:
            return None
        correspondences = detection_to_correspondences(detection, cfg.marker)
        try:
            # warm-started from the previous estimate; a tighter budget is
            # plenty at the accuracy the noisy correspondences support
            result = solve_pnp(correspondences, cfg.intrinsics, self._guess,
                               max_iterations=25)
        except (DegenerateConfigurationError, PnPNonConvergenceError):
            return None
        self._guess = result.camera_from_target
        return compose(world_from_camera, result.camera_from_target)


def run_scenario(config: ScenarioConfig) -> RunReport:
    """Deterministic closed-loop rollout; terminates at first tip contact
    or at the configured duration.

    On plant divergence the PlantInstabilityError is re-raised with the
    partial log attached as ``exc.partial_report``.
    """
    dt = config.plant.dt
    n_steps = round(config.duration / dt)
    steps_per_control = _steps_per_period(config.control_rate_hz, dt, "control")
    steps_per_percep = _steps_per_period(config.perception.rate_hz, dt,
                                         "perception")

    true_target = Pose.from_yaw(np.asarray(config.target_position),
                                config.target_yaw)
    surface = ContactSurface.from_target_pose(true_target)
    psi_d = desired_yaw_from_target(true_target)
    state = PlantState.at_rest(config.uav_position, config.uav_yaw)
    dynamic = config.plant_variant == "dynamic"
    estimated = config.perception.mode == "estimated"

    seeds = np.random.SeedSequence(config.seed).spawn(2)
    channel = None
    pipeline = None
    held: Optional[Pose] = None
    held_sent_at = -math.inf
    if estimated:
        pipeline = _PerceptionPipeline(
            config.perception, np.random.Generator(np.random.PCG64(seeds[0])))
        link_seed = int(seeds[1].generate_state(1, dtype=np.uint64)[0])
        delays = LinkDelays(config.link.uplink, config.link.downlink,
                            config.link.loss_prob, seed=link_seed)
        processing = config.link.processing_s
        channel = EdgeChannel(delays, config.link.tau_max,
                              lambda payload: processing)
    else:
        held = true_target

    recorder = _Recorder()
    cmd = VelocityCommand.zero()
    pending_outcome = ""
    contact = False
    delivery_records = []

    def record(at_time, at_state):
        nonlocal pending_outcome
        rel = relative_position(at_state.position, true_target)
        h = barrier_value(rel, config.barrier)
        epsi = kernels.wrap_angle(psi_d - at_state.yaw)
        recorder.append(at_time, at_state, cmd, h, rel, epsi, pending_outcome)
        pending_outcome = ""

    try:
        for k in range(n_steps):
            t = state.time
            if estimated and k % steps_per_percep == 0:
                estimate = pipeline.estimate(t, state, true_target)
                if estimate is not None:
                    channel.send(t, estimate)
            if channel is not None:
                for rec in channel.poll(t):
                    delivery_records.append(rec)
                    pending_outcome = rec.outcome.value
                    if (rec.outcome is Outcome.ACCEPTED
                            and rec.sent_at > held_sent_at):
                        held = rec.payload
                        held_sent_at = rec.sent_at
            if k % steps_per_control == 0:
                if held is not None:
                    cmd = control_step(Pose.from_yaw(state.position, state.yaw),
                                       held, psi_d, config.gains, config.barrier)
                record(t, state)
            if dynamic:
                state = step_dynamic(state, cmd, dt, config.plant, surface)
            else:
                state = step_kinematic(state, cmd, dt, config.plant, surface)
            if state.contact_force > 0.0:
                contact = True
                record(state.time, state)
                break
    except PlantInstabilityError as exc:
        series = recorder.series()
        exc.partial_report = RunReport(series, compute_metrics(series), config)
        raise

    series = recorder.series()
    if channel is not None:
        # messages still in flight at termination, with their would-be fate
        delivery_records.extend(channel.poll(math.inf))
    report = RunReport(series, compute_metrics(series), config,
                       export_delivery_log(delivery_records))
    assert report.summary["contact_reached"] == contact
    return report


# ---------------------------------------------------------------------------
# metrics and artifacts

def compute_metrics(series: RunSeries) -> dict:
    """Summary block recomputable from the time series alone.

    Contact is the first sample with positive contact force (runs
    terminate there); fraction_estimates_accepted counts logged
    perception outcomes and is 1.0 when the run had none.
    """
    if len(series) == 0:
        raise ValueError("empty series")
    contact_idx = None
    nonzero = np.flatnonzero(series.f_contact > 0.0)
    if nonzero.size:
        contact_idx = int(nonzero[0])
    crossing = np.flatnonzero(series.h >= 0.0)
    min_h_after = float(series.h[int(crossing[0]):].min()) if crossing.size else None
    events = [o for o in series.percep_outcome if o]
    accepted = sum(1 for o in events if o == Outcome.ACCEPTED.value)
    return {
        "contact_reached": contact_idx is not None,
        "time_to_contact_s": (float(series.t[contact_idx])
                              if contact_idx is not None else None),
        "contact_speed_mps": (float(math.hypot(series.vx[contact_idx],
                                               series.vy[contact_idx],
                                               series.vz[contact_idx]))
                              if contact_idx is not None else None),
        "min_h_after_first_crossing_m": min_h_after,
        "fraction_estimates_accepted": (accepted / len(events)
                                        if events else 1.0),
    }


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def write_run_csv(series: RunSeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for i in range(len(series)):
            writer.writerow(
                [_fmt(series.t[i]), _fmt(series.px[i]), _fmt(series.py[i]),
                 _fmt(series.pz[i]), _fmt(series.vx[i]), _fmt(series.vy[i]),
                 _fmt(series.vz[i]), _fmt(series.h[i]), _fmt(series.ex[i]),
                 _fmt(series.ey[i]), _fmt(series.ez[i]), _fmt(series.epsi[i]),
                 _fmt(series.ux[i]), _fmt(series.uy[i]), _fmt(series.uz[i]),
                 _fmt(series.yawrate[i]), _fmt(series.f_contact[i]),
                 series.percep_outcome[i]])


def parse_run_csv(path) -> RunSeries:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        rows = [(*[float(v) for v in row[:17]], row[17]) for row in reader]
    cols = list(zip(*rows)) if rows else [[] for _ in CSV_COLUMNS]
    arrays = [np.asarray(c, dtype=float) for c in cols[:17]]
    outcomes = list(cols[17]) if rows else []
    return RunSeries(*arrays, outcomes)


def funnel_mesh(a: float, l_max: float, n_l: int = 30, n_theta: int = 48):
    """Surface of revolution of the barrier boundary x = a sqrt(l) about
    the approach axis, in target-frame coordinates (X, Y, Z)."""
    l = np.linspace(0.0, l_max, n_l)
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta)
    lg, tg = np.meshgrid(l, theta)
    return a * np.sqrt(lg), lg * np.cos(tg), lg * np.sin(tg)


def _write_plots(series: RunSeries, barrier_a: float, out_dir: Path) -> dict:
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    paths = {}

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(series.t, series.h)
    ax.axhline(0.0, color="k", linewidth=0.8, linestyle="--")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("h [m]")
    ax.set_title("barrier value")
    ax.grid(True)
    paths["h"] = out_dir / "h.svg"
    fig.savefig(paths["h"])
    plt.close(fig)

    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    axes[0].plot(series.t, series.ex, label="e_x")
    axes[0].plot(series.t, series.ey, label="e_y")
    axes[0].plot(series.t, series.ez, label="e_z")
    axes[0].set_ylabel("position error [m]")
    axes[0].legend()
    axes[0].grid(True)
    axes[1].plot(series.t, series.epsi, label="e_psi")
    axes[1].set_ylabel("yaw error [rad]")
    axes[1].set_xlabel("t [s]")
    axes[1].grid(True)
    paths["errors"] = out_dir / "errors.svg"
    fig.savefig(paths["errors"])
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(series.t, series.ux, label="u_x")
    ax.plot(series.t, series.uy, label="u_y")
    ax.plot(series.t, series.uz, label="u_z")
    ax.plot(series.t, series.yawrate, label="yaw rate", linestyle="--")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("commanded velocity [m/s, rad/s]")
    ax.legend()
    ax.grid(True)
    paths["commanded_velocity"] = out_dir / "commanded_velocity.svg"
    fig.savefig(paths["commanded_velocity"])
    plt.close(fig)

    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    l_traj = np.hypot(series.ey, series.ez)
    l_max = max(float(l_traj.max()) * 1.1, 0.2)
    mesh_x, mesh_y, mesh_z = funnel_mesh(barrier_a, l_max)
    ax.plot_surface(mesh_x, mesh_y, mesh_z, alpha=0.25, color="red",
                    linewidth=0)
    ax.plot(series.ex, series.ey, series.ez, color="tab:blue")
    ax.scatter([0.0], [0.0], [0.0], color="k", marker="x")
    ax.set_xlabel("x_T [m]")
    ax.set_ylabel("y_T [m]")
    ax.set_zlabel("z_T [m]")
    ax.set_title(f"trajectory vs funnel boundary (a={barrier_a:g})")
    paths["trajectory_funnel"] = out_dir / "trajectory_funnel.svg"
    fig.savefig(paths["trajectory_funnel"])
    plt.close(fig)
    return paths


def emit_outputs(report: RunReport, out_dir) -> dict:
    """Write run.csv, summary.json and the SVG plots; returns the paths
    keyed by artifact name.  summary.json is computed from the CSV just
    written, so recomputing metrics from the file reproduces it
    exactly."""
    if len(report.series) == 0:
        raise ValueError("cannot emit outputs for an empty report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"run_csv": out / "run.csv", "summary": out / "summary.json"}
    write_run_csv(report.series, paths["run_csv"])
    summary = compute_metrics(parse_run_csv(paths["run_csv"]))
    with open(paths["summary"], "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.update(_write_plots(report.series, report.config.barrier.a, out))
    return paths
