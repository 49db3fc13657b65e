"""Simulated UAV plant and compliant-arm contact model.

Two variants share one state type: a kinematic plant that realizes the
commanded velocity exactly (single-integrator), and a dynamic plant
with a per-axis velocity PID, gravity feed-forward, per-axis force
clamping, and semi-implicit Euler integration.  Contact is a
spring-damper normal force at the end-effector tip (a fixed offset
ahead of the body origin along body +x) against the target plane;
attitude is reduced to yaw.

Both step functions are pure: they take a state snapshot and return a
new one, which makes trajectories trivially deterministic and
replayable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from funnelsim.backend import kernels
from funnelsim.controller import VelocityCommand
from funnelsim.errors import PlantInstabilityError
from funnelsim.geometry import Pose


@dataclass(frozen=True)
class ArmParams:
    """Compliant-arm inertia (kg), damping (N s/m) and stiffness (N/m).
    The contact model is quasi-static: the inertia term is not simulated,
    deflection simply tracks penetration."""

    m_a: float = 0.05
    d_a: float = 4.0
    k_a: float = 120.0

    def __post_init__(self):
        if self.k_a <= 0.0 or self.d_a < 0.0 or self.m_a < 0.0:
            raise ValueError("need k_a > 0 and d_a, m_a >= 0")


@dataclass(frozen=True)
class PidGains:
    kp: float = 6.0
    ki: float = 2.0
    kd: float = 0.0


@dataclass(frozen=True)
class PlantParams:
    mass: float = 1.5
    g: float = 9.81
    pid_velocity: PidGains = PidGains()
    f_max: float = 30.0
    arm: ArmParams = ArmParams()
    dt: float = 1e-3
    tip_offset: float = 0.3
    speed_limit: float = 50.0

    def __post_init__(self):
        if not (self.mass > 0.0 and self.dt > 0.0 and self.f_max > 0.0):
            raise ValueError("mass, dt and f_max must be positive")
        if self.tip_offset < 0.0 or self.speed_limit <= 0.0:
            raise ValueError("tip_offset >= 0 and speed_limit > 0 required")


@dataclass(frozen=True)
class ContactSurface:
    """Target plane: a point on it and its outward unit normal (the
    direction the approach comes from)."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        p = np.array(self.point, dtype=float).reshape(3)
        n = np.array(self.normal, dtype=float).reshape(3)
        norm = np.linalg.norm(n)
        if not norm > 0.0:
            raise ValueError("surface normal must be nonzero")
        n = n / norm
        p.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", n)

    @classmethod
    def from_target_pose(cls, world_from_target: Pose) -> ContactSurface:
        """Plane through the target origin, normal along target +x."""
        return cls(world_from_target.position,
                   world_from_target.orientation.matrix[:, 0])


@dataclass(frozen=True)
class PlantState:
    position: np.ndarray
    velocity: np.ndarray
    yaw: float = 0.0
    arm_deflection: float = 0.0
    arm_deflection_rate: float = 0.0
    contact_force: float = 0.0
    time: float = 0.0
    pid_integral: tuple = (0.0, 0.0, 0.0)
    pid_prev_error: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("position", "velocity"):
            v = getattr(self, name)
            # frozen float arrays pass through untouched (the step functions
            # hand over ownership; dataclasses.replace reuses old fields)
            if not (isinstance(v, np.ndarray) and v.dtype == np.float64
                    and v.shape == (3,) and not v.flags.writeable):
                v = np.array(v, dtype=float).reshape(3)
                v.setflags(write=False)
                object.__setattr__(self, name, v)

    @classmethod
    def at_rest(cls, position, yaw: float = 0.0) -> PlantState:
        return cls(np.asarray(position, dtype=float), np.zeros(3), yaw=yaw)


DEFAULT_PARAMS = PlantParams()


def contact_force(penetration: float, penetration_rate: float,
                  arm: ArmParams) -> float:
    """Spring-damper normal force k_a * pen + d_a * rate, floored at zero
    (the surface cannot pull).  penetration must be >= 0."""
    if penetration < 0.0:
        raise ValueError("penetration must be nonnegative")
    return max(0.0, arm.k_a * penetration + arm.d_a * penetration_rate)


def _contact_fields(position, velocity, yaw, yaw_rate, params: PlantParams,
                    surface: ContactSurface | None):
    if surface is None:
        return 0.0, 0.0, 0.0, (0.0, 0.0, 0.0)
    f, pen, rate, fx, fy, fz = kernels.contact_state(
        (position[0], position[1], position[2]),
        (velocity[0], velocity[1], velocity[2]),
        yaw, yaw_rate, params.tip_offset,
        (surface.point[0], surface.point[1], surface.point[2]),
        (surface.normal[0], surface.normal[1], surface.normal[2]),
        params.arm.k_a, params.arm.d_a)
    return f, pen, rate, (fx, fy, fz)


def step_kinematic(state: PlantState, cmd: VelocityCommand, dt: float,
                   params: PlantParams | None = None,
                   surface: ContactSurface | None = None) -> PlantState:
    """Single-integrator step: position += u dt, velocity := u, yaw
    integrates the commanded rate (wrapped).  Contact force, if a surface
    is given, is bookkeeping only; it does not affect the motion."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    u = cmd.linear_world
    px, py, pz, yaw = kernels.step_kinematic(
        (state.position[0], state.position[1], state.position[2]),
        state.yaw, (u[0], u[1], u[2]), cmd.yaw_rate, dt)
    position = np.array([px, py, pz])
    position.setflags(write=False)
    velocity = u  # already frozen inside the command
    force, pen, rate, _ = _contact_fields(
        position, velocity, yaw, cmd.yaw_rate,
        params if params is not None else DEFAULT_PARAMS, surface)
    return replace(state, position=position, velocity=velocity, yaw=yaw,
                   arm_deflection=pen, arm_deflection_rate=rate,
                   contact_force=force, time=state.time + dt)


def step_dynamic(state: PlantState, cmd: VelocityCommand, dt: float,
                 params: PlantParams,
                 surface: ContactSurface | None = None) -> PlantState:
    """Force-driven step: velocity PID + gravity feed-forward, per-axis
    clamp to +/- f_max, contact reaction evaluated at the pre-step state,
    semi-implicit Euler integration.

    Raises PlantInstabilityError when the speed exceeds
    params.speed_limit, which signals velocity-loop gains unstable at
    this dt.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    _, _, _, f_ext = _contact_fields(
        state.position, state.velocity, state.yaw, cmd.yaw_rate, params, surface)
    gains = params.pid_velocity
    u = cmd.linear_world
    (px, py, pz, vx, vy, vz, yaw,
     ix, iy, iz, ex, ey, ez) = kernels.step_dynamic(
        (state.position[0], state.position[1], state.position[2]),
        (state.velocity[0], state.velocity[1], state.velocity[2]),
        state.yaw, state.pid_integral, state.pid_prev_error,
        (u[0], u[1], u[2]), cmd.yaw_rate, f_ext,
        params.mass, params.g, gains.kp, gains.ki, gains.kd,
        params.f_max, dt)
    if vx * vx + vy * vy + vz * vz > params.speed_limit ** 2:
        raise PlantInstabilityError(
            f"speed exceeded {params.speed_limit} m/s at t={state.time + dt:.3f}s; "
            "velocity-loop gains are unstable for this dt")
    position = np.array([px, py, pz])
    velocity = np.array([vx, vy, vz])
    position.setflags(write=False)
    velocity.setflags(write=False)
    force, pen, rate, _ = _contact_fields(
        position, velocity, yaw, cmd.yaw_rate, params, surface)
    return replace(state, position=position, velocity=velocity, yaw=yaw,
                   arm_deflection=pen, arm_deflection_rate=rate,
                   contact_force=force, time=state.time + dt,
                   pid_integral=(ix, iy, iz), pid_prev_error=(ex, ey, ez))
