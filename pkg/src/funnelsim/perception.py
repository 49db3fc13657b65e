"""Pinhole projection, iterative PnP pose estimation, and a synthetic
marker detector.

The detector stands in for a learned object detector: it projects a
planar marker (outer rectangle plus inner circle keypoints), jitters
the pixels, and reports a bounding box with a quality level picked by
apparent size — ``best`` when the inner-circle region is large enough
in pixels, then ``better``, then ``good``.  Keypoint pixel locations
are reconstructed from the box by mapping the marker layout into the
crop, which is exact for head-on viewing and degrades gracefully with
tilt, as a box detector does.

Pose estimation minimizes reprojection error with Gauss-Newton plus
Levenberg damping; rotation increments are axis-angle and the rotation
is re-orthonormalized every accepted step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from funnelsim.errors import (BehindCameraError, DegenerateConfigurationError,
                              PnPNonConvergenceError)
from funnelsim.geometry import (Pose, RotationMatrix, _hat,
                                _project_to_rotation)

MIN_DEPTH = 1e-6

# Camera optical frame relative to the vehicle body: z forward (along
# body +x), x right (along body -y), y down (along body -z).
CAMERA_IN_BODY = np.array([[0.0, 0.0, 1.0],
                           [-1.0, 0.0, 0.0],
                           [0.0, -1.0, 0.0]])

# Canonical head-on view of the marker: camera z axis anti-parallel to
# the target +x (surface normal), marker y right, marker z up.
HEAD_ON_CAMERA_FROM_TARGET = np.array([[0.0, 1.0, 0.0],
                                       [0.0, 0.0, -1.0],
                                       [-1.0, 0.0, 0.0]])


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0.0 or self.fy <= 0.0:
            raise ValueError("focal lengths must be positive")


@dataclass(frozen=True)
class Correspondence:
    """A marker keypoint (target frame, meters) and its observed pixel."""

    point_target: np.ndarray
    pixel: np.ndarray

    def __post_init__(self):
        p = np.array(self.point_target, dtype=float).reshape(3)
        px = np.array(self.pixel, dtype=float).reshape(2)
        if not np.all(np.isfinite(px)):
            raise ValueError("pixel must be finite")
        p.setflags(write=False)
        px.setflags(write=False)
        object.__setattr__(self, "point_target", p)
        object.__setattr__(self, "pixel", px)


class DetectionLevel(str, enum.Enum):
    GOOD = "good"
    BETTER = "better"
    BEST = "best"


@dataclass(frozen=True)
class Detection:
    """Axis-aligned pixel box (u_min, v_min, u_max, v_max), quality level
    and capture timestamp."""

    bbox: tuple
    level: DetectionLevel
    timestamp: float

    def __post_init__(self):
        u0, v0, u1, v1 = self.bbox
        if not (u0 < u1 and v0 < v1):
            raise ValueError(f"degenerate bbox {self.bbox}")


def project(intrinsics: CameraIntrinsics, camera_from_target: Pose,
            point_target) -> tuple:
    """Pinhole projection of a target-frame point: (fx x/z + cx, fy y/z + cy).

    Raises BehindCameraError when the camera-frame depth is <= 1e-6 m.
    """
    pc = camera_from_target.transform_point(point_target)
    if pc[2] <= MIN_DEPTH:
        raise BehindCameraError(f"point depth {pc[2]:.3e} m is not positive")
    return (intrinsics.fx * pc[0] / pc[2] + intrinsics.cx,
            intrinsics.fy * pc[1] / pc[2] + intrinsics.cy)


def _project_array(intrinsics, r, t, points):
    """Vectorized pinhole projection; returns (pixels (n,2), depths (n,))."""
    pc = points @ r.T + t
    z = pc[:, 2]
    uv = np.empty((points.shape[0], 2))
    uv[:, 0] = intrinsics.fx * pc[:, 0] / z + intrinsics.cx
    uv[:, 1] = intrinsics.fy * pc[:, 1] / z + intrinsics.cy
    return uv, z


@dataclass(frozen=True)
class PnPResult:
    camera_from_target: Pose
    residual_rms: float
    iterations: int
    residual_history: tuple


def _rodrigues(w: np.ndarray) -> np.ndarray:
    th = math.sqrt(float(w @ w))
    wx = _hat(w)
    if th < 1e-8:
        return np.eye(3) + wx + 0.5 * (wx @ wx)
    s = math.sin(th) / th
    c = (1.0 - math.cos(th)) / (th * th)
    return np.eye(3) + s * wx + c * (wx @ wx)


def _pose_jacobian(intrinsics, pc):
    """Stacked 2n x 6 Jacobian of pixel residuals w.r.t. (rot, trans)
    increments, rotation perturbed on the left (axis-angle)."""
    n = pc.shape[0]
    x, y, z = pc[:, 0], pc[:, 1], pc[:, 2]
    fx_z = intrinsics.fx / z
    fy_z = intrinsics.fy / z
    jac = np.zeros((2 * n, 6))
    # d pixel / d p_c, chained with d p_c / d omega = -hat(p_c)
    jac[0::2, 0] = -fx_z * x * y / z
    jac[0::2, 1] = intrinsics.fx + fx_z * x * x / z
    jac[0::2, 2] = -fx_z * y
    jac[1::2, 0] = -(intrinsics.fy + fy_z * y * y / z)
    jac[1::2, 1] = fy_z * x * y / z
    jac[1::2, 2] = fy_z * x
    # d pixel / d t
    jac[0::2, 3] = fx_z
    jac[0::2, 5] = -fx_z * x / z
    jac[1::2, 4] = fy_z
    jac[1::2, 5] = -fy_z * y / z
    return jac


def _refine_pose(pts, obs, intrinsics, r, t, max_iterations, step_tol,
                 gradient_tol, cost_tol, check_rank):
    """Levenberg-damped Gauss-Newton descent from (r, t); accepts only
    improving steps.  Returns (r, t, cost, history), or None when the
    start already puts points behind the camera."""
    n = pts.shape[0]
    uv, z = _project_array(intrinsics, r, t, pts)
    if np.any(z <= MIN_DEPTH):
        return None
    res = (uv - obs).ravel()
    cost = float(res @ res)
    history = [math.sqrt(cost / n)]
    eye6 = np.eye(6)
    lam = 1e-4
    for iteration in range(1, max_iterations + 1):
        pc = pts @ r.T + t
        jac = _pose_jacobian(intrinsics, pc)
        if check_rank and iteration == 1 and np.linalg.matrix_rank(jac) < 6:
            raise DegenerateConfigurationError(
                "normal equations are rank deficient for this marker geometry")
        jtj = jac.T @ jac
        jtr = jac.T @ res
        if float(np.abs(jtr).max()) < gradient_tol:
            break
        # Marquardt scaling handles the rotation/translation scale gap
        diag = np.diag(np.diag(jtj))
        accepted = False
        while lam <= 1e10:
            try:
                delta = np.linalg.solve(jtj + lam * (diag + 1e-12 * eye6), -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            r_new = _project_to_rotation(_rodrigues(delta[:3]) @ r)
            t_new = t + delta[3:]
            uv, z = _project_array(intrinsics, r_new, t_new, pts)
            if not np.any(z <= MIN_DEPTH):
                res_new = (uv - obs).ravel()
                cost_new = float(res_new @ res_new)
                if cost_new <= cost:
                    accepted = True
                    break
            lam *= 10.0
        if not accepted:
            break  # no damping level improves the cost: local minimum
        improvement = cost - cost_new
        r, t, res, cost = r_new, t_new, res_new, cost_new
        history.append(math.sqrt(cost / n))
        lam = max(lam * 0.3, 1e-12)
        if float(np.linalg.norm(delta)) < step_tol:
            break
        # noise floor: undamped steps no longer move the cost
        if lam <= 1e-6 and improvement <= cost_tol * cost:
            break
    return r, t, cost, history


def _planar_dlt(pts, obs, intrinsics, centroid, basis):
    """Direct pose for a planar target via homography DLT: marker plane
    coordinates -> normalized image coordinates, decomposed into (R, t).
    basis is the 3x3 plane frame (columns: two in-plane axes, normal)
    from the SVD of the centered points.  Returns None on degeneracy."""
    q = (pts - centroid) @ basis[:, :2]
    m = np.empty_like(q)
    m[:, 0] = (obs[:, 0] - intrinsics.cx) / intrinsics.fx
    m[:, 1] = (obs[:, 1] - intrinsics.cy) / intrinsics.fy

    def _normalizer(x):
        c = x.mean(axis=0)
        scale = math.sqrt(2.0) / max(np.linalg.norm(x - c, axis=1).mean(), 1e-12)
        t = np.array([[scale, 0.0, -scale * c[0]],
                      [0.0, scale, -scale * c[1]],
                      [0.0, 0.0, 1.0]])
        return t, (x - c) * scale

    tq, qn = _normalizer(q)
    tm, mn = _normalizer(m)
    n = q.shape[0]
    a = np.zeros((2 * n, 9))
    a[0::2, 0] = -qn[:, 0]
    a[0::2, 1] = -qn[:, 1]
    a[0::2, 2] = -1.0
    a[0::2, 6] = mn[:, 0] * qn[:, 0]
    a[0::2, 7] = mn[:, 0] * qn[:, 1]
    a[0::2, 8] = mn[:, 0]
    a[1::2, 3] = -qn[:, 0]
    a[1::2, 4] = -qn[:, 1]
    a[1::2, 5] = -1.0
    a[1::2, 6] = mn[:, 1] * qn[:, 0]
    a[1::2, 7] = mn[:, 1] * qn[:, 1]
    a[1::2, 8] = mn[:, 1]
    try:
        _, svals, vt = np.linalg.svd(a)
    except np.linalg.LinAlgError:
        return None
    if svals[7] < 1e-12 * svals[0]:
        return None
    hn = vt[8].reshape(3, 3)
    h = np.linalg.inv(tm) @ hn @ tq
    h1, h2, h3 = h[:, 0], h[:, 1], h[:, 2]
    n1, n2 = np.linalg.norm(h1), np.linalg.norm(h2)
    if n1 < 1e-12 or n2 < 1e-12:
        return None
    s = 2.0 / (n1 + n2)
    if h3[2] < 0.0:
        s = -s
    r1 = s * h1
    r2 = s * h2
    r_plane = _project_to_rotation(np.column_stack([r1, r2, np.cross(r1, r2)]))
    t_plane = s * h3
    # plane frame -> target frame
    r_ct = r_plane @ basis.T
    t_ct = t_plane - r_ct @ centroid
    return r_ct, t_ct


def solve_pnp(correspondences: Sequence[Correspondence],
              intrinsics: CameraIntrinsics, initial_guess: Pose, *,
              max_iterations: int = 100, step_tol: float = 1e-10,
              gradient_tol: float = 1e-12, cost_tol: float = 1e-6) -> PnPResult:
    """Estimate camera_from_target by Levenberg-damped Gauss-Newton on
    the reprojection error.

    Needs >= 4 non-collinear points and an initial guess in the
    convergence basin (target roughly in front of the camera).  Steps are
    accepted only when they reduce the residual, so the reported history
    is non-increasing.  Terminates when the step norm drops below
    step_tol, the normal-equation gradient vanishes, no damping level
    can improve the cost (a numerical local minimum), an accepted step
    improves the cost by less than cost_tol relative (noise floor), or
    the iteration budget runs out; residual_rms is the root-mean-square
    pixel error per point.

    For planar markers (the usual case here) a second descent is run from
    a direct homography-DLT pose whenever the first one stalls above the
    exact-fit floor, and the lower-cost pose wins; this covers both the
    classic two-fold planar ambiguity and narrow curved valleys the
    damped descent crawls through.

    Raises DegenerateConfigurationError for rank-deficient geometry and
    PnPNonConvergenceError when the initial guess puts marker points
    behind the camera (outside any convergence basin).
    """
    if len(correspondences) < 4:
        raise DegenerateConfigurationError(
            f"need at least 4 correspondences, got {len(correspondences)}")
    pts = np.array([c.point_target for c in correspondences])
    obs = np.array([c.pixel for c in correspondences])
    n = pts.shape[0]
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, svals, vt = np.linalg.svd(centered)
    if svals[1] < 1e-9 * max(svals[0], 1.0):
        raise DegenerateConfigurationError("marker points are collinear")
    planar = svals[2] < 1e-9 * svals[0]

    first = _refine_pose(pts, obs, intrinsics,
                         initial_guess.orientation.matrix.copy(),
                         initial_guess.position.copy(),
                         max_iterations, step_tol, gradient_tol, cost_tol,
                         check_rank=True)
    if first is None:
        raise PnPNonConvergenceError("initial guess puts points behind camera")
    r, t, cost, history = first

    if planar and cost > (1e-8) ** 2 * n:
        alt = _planar_dlt(pts, obs, intrinsics, centroid, vt.T)
        if alt is not None:
            uv, z = _project_array(intrinsics, alt[0], alt[1], pts)
            # refine from the algebraic pose only when it already beats
            # the descent result (stall or wrong ambiguity branch)
            if (not np.any(z <= MIN_DEPTH)
                    and float(((uv - obs).ravel() ** 2).sum()) < cost):
                refined = _refine_pose(pts, obs, intrinsics, alt[0], alt[1],
                                       max_iterations, step_tol, gradient_tol,
                                       cost_tol, check_rank=False)
                if refined is not None and refined[2] < cost:
                    r, t, cost, history = refined
    return PnPResult(Pose(t, RotationMatrix(r)), math.sqrt(cost / n),
                     len(history) - 1, tuple(history))


@dataclass(frozen=True)
class TargetGeometry:
    """Planar marker in the target y-z plane (x = 0): an outer rectangle
    of half extents (half_width, half_height) and an inner circle of
    radius circle_radius, all meters.  Keypoints are the rectangle
    corners, the circle's axis extremes, and the center."""

    half_width: float = 0.25
    half_height: float = 0.25
    circle_radius: float = 0.08

    def __post_init__(self):
        if not (0.0 < self.circle_radius < min(self.half_width, self.half_height)):
            raise ValueError("need 0 < circle_radius < half extents")

    @property
    def keypoints(self) -> np.ndarray:
        w, h, r = self.half_width, self.half_height, self.circle_radius
        return np.array([
            [0.0, -w, -h], [0.0, w, -h], [0.0, w, h], [0.0, -w, h],  # corners
            [0.0, -r, 0.0], [0.0, r, 0.0], [0.0, 0.0, -r], [0.0, 0.0, r],
            [0.0, 0.0, 0.0],
        ])

    # indices into keypoints
    CORNERS = slice(0, 4)
    CIRCLE = slice(4, 8)


@dataclass(frozen=True)
class DetectorModel:
    """Failure/quality model of the synthetic detector: image bounds,
    dropout probability, Gaussian pixel jitter, and the inner-circle
    pixel-area thresholds that pick the detection level."""

    image_width: float = 640.0
    image_height: float = 480.0
    dropout_prob: float = 0.0
    pixel_jitter: float = 0.0
    best_area: float = 4000.0
    better_area: float = 1600.0

    def __post_init__(self):
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError("dropout_prob must be in [0, 1]")
        if self.pixel_jitter < 0.0:
            raise ValueError("pixel_jitter must be >= 0")
        if not self.best_area > self.better_area > 0.0:
            raise ValueError("need best_area > better_area > 0")


def synthetic_detect(camera_from_target: Pose, intrinsics: CameraIntrinsics,
                     geometry: TargetGeometry, model: DetectorModel,
                     rng: np.random.Generator,
                     timestamp: float = 0.0) -> Optional[Detection]:
    """Project the marker and emit a Detection, or None when the marker is
    behind the camera, partially outside the image, or dropped by the
    failure model (absence is a valid outcome)."""
    if model.dropout_prob > 0.0 and rng.random() < model.dropout_prob:
        return None
    pts = geometry.keypoints
    uv, z = _project_array(intrinsics, camera_from_target.orientation.matrix,
                           camera_from_target.position, pts)
    if np.any(z <= MIN_DEPTH):
        return None
    if model.pixel_jitter > 0.0:
        uv = uv + rng.normal(0.0, model.pixel_jitter, uv.shape)
    u_min, v_min = uv.min(axis=0)
    u_max, v_max = uv.max(axis=0)
    if (u_min < 0.0 or v_min < 0.0 or u_max > model.image_width
            or v_max > model.image_height):
        return None
    circle = uv[TargetGeometry.CIRCLE]
    du = circle[:, 0].max() - circle[:, 0].min()
    dv = circle[:, 1].max() - circle[:, 1].min()
    area = du * dv
    if area >= model.best_area:
        level = DetectionLevel.BEST
    elif area >= model.better_area:
        level = DetectionLevel.BETTER
    else:
        level = DetectionLevel.GOOD
    return Detection((float(u_min), float(v_min), float(u_max), float(v_max)),
                     level, timestamp)


def detection_to_correspondences(detection: Detection,
                                 geometry: TargetGeometry) -> list:
    """Reconstruct keypoint pixels by mapping the marker layout into the
    bounding-box crop (u grows with marker +y, v with marker -z; the
    marker is assumed upright).  Exact for head-on views."""
    u0, v0, u1, v1 = detection.bbox
    w, h = geometry.half_width, geometry.half_height
    out = []
    for point in geometry.keypoints:
        s = (point[1] + w) / (2.0 * w)
        r = (h - point[2]) / (2.0 * h)
        out.append(Correspondence(point, (u0 + s * (u1 - u0),
                                          v0 + r * (v1 - v0))))
    return out
