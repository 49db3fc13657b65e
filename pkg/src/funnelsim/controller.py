"""Outer-loop contact-approach controller.

Cascade per tick: proportional pseudo-velocity toward the contact point
(the target-frame origin), rotation into the target frame, barrier
filtering (funnel), rotation back to world, direction-preserving speed
saturation, and a proportional yaw-rate law on the wrapped heading
error.  Saturation is applied after the filter, which is what lets a
force-limited plant leave the safe set momentarily.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from funnelsim.backend import kernels
from funnelsim.cbf_safety import BarrierParams
from funnelsim.geometry import Pose


@dataclass(frozen=True)
class ControllerGains:
    """kp: 3x3 positive-definite position gain (1/s); k_psi: yaw gain
    (1/s); v_max (m/s) and yaw_rate_max (rad/s) saturation levels."""

    kp: np.ndarray
    k_psi: float
    v_max: float
    yaw_rate_max: float

    def __post_init__(self):
        kp = np.array(self.kp, dtype=float)
        if kp.shape != (3, 3):
            raise ValueError(f"kp must be 3x3, got {kp.shape}")
        if np.abs(kp - kp.T).max() > 1e-9:
            raise ValueError("kp must be symmetric")
        if np.linalg.eigvalsh(kp).min() <= 0.0:
            raise ValueError("kp must be positive definite")
        if not (self.k_psi > 0.0 and self.v_max > 0.0 and self.yaw_rate_max > 0.0):
            raise ValueError("k_psi, v_max and yaw_rate_max must be positive")
        kp.setflags(write=False)
        object.__setattr__(self, "kp", kp)

    @classmethod
    def diagonal(cls, kx: float, ky: float, kz: float, k_psi: float,
                 v_max: float, yaw_rate_max: float) -> ControllerGains:
        return cls(np.diag([kx, ky, kz]), k_psi, v_max, yaw_rate_max)


@dataclass(frozen=True)
class VelocityCommand:
    """Filtered world-frame linear velocity plus yaw rate."""

    linear_world: np.ndarray
    yaw_rate: float

    def __post_init__(self):
        v = self.linear_world
        if not (isinstance(v, np.ndarray) and v.dtype == np.float64
                and v.shape == (3,) and not v.flags.writeable):
            v = np.array(v, dtype=float).reshape(3)
            v.setflags(write=False)
            object.__setattr__(self, "linear_world", v)

    @classmethod
    def zero(cls) -> VelocityCommand:
        return cls(np.zeros(3), 0.0)


def nominal_velocity(p_desired, p, gains: ControllerGains) -> np.ndarray:
    """Pseudo-velocity input Kp (p_d - p), world frame."""
    return gains.kp @ (np.asarray(p_desired, dtype=float) -
                       np.asarray(p, dtype=float))


def yaw_rate_command(psi_desired: float, psi: float,
                     gains: ControllerGains) -> float:
    """k_psi times the heading error wrapped to (-pi, pi] (shortest path)."""
    return gains.k_psi * kernels.wrap_angle(psi_desired - psi)


def desired_yaw_from_target(world_from_target: Pose) -> float:
    """Default contact heading: body +x facing the target surface, i.e.
    aligned with the target -x axis projected to the horizontal plane."""
    axis = world_from_target.orientation.matrix[:, 0]
    return float(np.arctan2(-axis[1], -axis[0]))


def control_step(uav_pose: Pose, target_pose: Pose, psi_desired: float,
                 gains: ControllerGains, barrier: BarrierParams) -> VelocityCommand:
    """One control tick of the full cascade.

    target_pose is world_from_target; the contact point is its origin and
    the approach axis its +x.  Inside the axis cone (l < l_eps) the
    nominal input is passed through unfiltered.
    """
    ux, uy, uz, rate, _, _ = kernels.control_cascade(
        (uav_pose.position[0], uav_pose.position[1], uav_pose.position[2]),
        uav_pose.orientation.yaw(),
        (target_pose.position[0], target_pose.position[1], target_pose.position[2]),
        target_pose.orientation.as_tuple9(),
        psi_desired,
        (gains.kp[0, 0], gains.kp[0, 1], gains.kp[0, 2],
         gains.kp[1, 0], gains.kp[1, 1], gains.kp[1, 2],
         gains.kp[2, 0], gains.kp[2, 1], gains.kp[2, 2]),
        gains.k_psi, gains.v_max, gains.yaw_rate_max,
        barrier.a, barrier.gamma, barrier.l_eps)
    linear = np.array([ux, uy, uz])
    linear.setflags(write=False)
    return VelocityCommand(linear, rate)
