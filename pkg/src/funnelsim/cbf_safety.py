"""Funnel barrier function and the minimally-invasive velocity filter.

The safe set is the inside of a funnel of revolution about the target
x-axis, h(x, y, z) = x - a * sqrt(l) >= 0 with l = sqrt(y^2 + z^2): the
funnel narrows to a point at the target origin, so any trajectory kept
inside it ends in a precise, low-speed contact.  The filter perturbs a
nominal velocity input as little as possible subject to the barrier
constraint grad(h) . u >= -gamma * h, which for single-integrator
kinematics is a single linear constraint and admits a closed-form
projection.

The gradient has a cusp on the axis (l = 0); callers must fall back to
the nominal input inside the cone l < l_eps, where the funnel poses no
constraint anyway.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from funnelsim.backend import kernels
from funnelsim.errors import AxisSingularityError, QPNonConvergenceError


@dataclass(frozen=True)
class BarrierParams:
    """Funnel shape parameter a (m^1/2), class-K gain gamma (1/s) used as
    omega(h) = gamma * h, and the axis-singularity threshold l_eps (m)."""

    a: float
    gamma: float = 1.0
    l_eps: float = 1e-3

    def __post_init__(self):
        if not (self.a > 0.0 and self.gamma > 0.0 and self.l_eps > 0.0):
            raise ValueError(
                f"barrier parameters must be positive, got a={self.a}, "
                f"gamma={self.gamma}, l_eps={self.l_eps}")


@dataclass(frozen=True)
class BarrierEvaluation:
    h: float
    gradient: np.ndarray
    on_axis: bool


def lateral_radius(rel) -> float:
    """Distance from the approach axis, l = sqrt(y^2 + z^2)."""
    return sqrt(rel[1] * rel[1] + rel[2] * rel[2])


def barrier_value(rel, params: BarrierParams) -> float:
    """h = x - a * sqrt(l).  Positive inside the funnel (safe), negative
    outside, equal to x on the axis."""
    return kernels.barrier_value(rel[0], rel[1], rel[2], params.a)


def barrier_gradient(rel, params: BarrierParams) -> np.ndarray:
    """(dh/dx, dh/dy, dh/dz) = (1, -a*y / (2 l^(3/2)), -a*z / (2 l^(3/2))).

    Raises AxisSingularityError when l < l_eps; the gradient has no limit
    on the axis.
    """
    if lateral_radius(rel) < params.l_eps:
        raise AxisSingularityError(
            f"lateral radius below l_eps={params.l_eps}; gradient undefined")
    gy, gz = kernels.barrier_gradient(rel[0], rel[1], rel[2], params.a)
    return np.array([1.0, gy, gz])


def evaluate_barrier(rel, params: BarrierParams) -> BarrierEvaluation:
    """Barrier value plus gradient; on the axis the gradient field holds
    the axial unit vector (only its x-entry is meaningful there)."""
    on_axis = lateral_radius(rel) < params.l_eps
    h = barrier_value(rel, params)
    if on_axis:
        return BarrierEvaluation(h, np.array([1.0, 0.0, 0.0]), True)
    return BarrierEvaluation(h, barrier_gradient(rel, params), False)


def safety_filter(u_nominal, rel, params: BarrierParams) -> np.ndarray:
    """Filter a target-frame nominal velocity through the barrier.

    If grad(h) . u_nominal >= -gamma * h the input is returned unchanged;
    otherwise the closed-form projection u + lambda * grad(h) with
    lambda = -(grad . u + gamma h) / ||grad||^2 is returned, satisfying
    the constraint with equality.

    Raises AxisSingularityError when l < l_eps (callers use the nominal
    input directly over that region).
    """
    if lateral_radius(rel) < params.l_eps:
        raise AxisSingularityError(
            f"lateral radius below l_eps={params.l_eps}; use nominal input")
    u = np.asarray(u_nominal, dtype=float)
    ux, uy, uz, _ = kernels.filter_velocity(
        u[0], u[1], u[2], rel[0], rel[1], rel[2], params.a, params.gamma)
    return np.array([ux, uy, uz])


def qp_oracle(u_nominal, gradient, h: float, gamma: float, *,
              step: float = 0.5, tol: float = 1e-12,
              max_iterations: int = 20000) -> np.ndarray:
    """Reference QP solver for cross-checking the closed form.

    Solves min ||u - u_nominal||^2 s.t. gradient . u >= -gamma * h by
    projected gradient descent: a gradient step on the objective followed
    by projection onto the constraint half-space, iterated until the step
    norm drops below tol.  Deliberately independent of the closed-form
    path; used in tests only.
    """
    g = np.asarray(gradient, dtype=float)
    gg = float(g @ g)
    if gg <= 0.0:
        raise ValueError("gradient must be nonzero")
    un = np.asarray(u_nominal, dtype=float)
    bound = -gamma * h
    u = un.copy()
    for _ in range(max_iterations):
        u_prev = u
        u = u - step * (u - un)
        slack = bound - float(g @ u)
        if slack > 0.0:
            u = u + (slack / gg) * g
        if float(np.linalg.norm(u - u_prev)) < tol:
            return u
    raise QPNonConvergenceError(
        f"projected gradient descent did not reach tol={tol} "
        f"in {max_iterations} iterations")
