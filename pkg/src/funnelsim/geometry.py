"""Rigid-frame algebra: rotations, poses, and frame changes.

Every transform in the package follows one naming convention:
``parent_from_child`` maps coordinates of a point expressed in the
child frame into the parent frame, p_parent = R @ p_child + t.  The
frames in play are world (W), vehicle body (B), camera (C) and target
(T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from funnelsim.errors import InvalidRotationError

ORTHONORMALITY_TOL = 1e-9


class RotationMatrix:
    """Proper 3x3 rotation, validated on construction.

    Stored as a read-only numpy array; construction helpers cover the
    parameterizations used elsewhere (yaw, roll-pitch-yaw, axis-angle).
    """

    __slots__ = ("_r",)

    def __init__(self, matrix, *, check: bool = True):
        r = np.array(matrix, dtype=float)
        if r.shape != (3, 3):
            raise InvalidRotationError(f"expected 3x3 matrix, got {r.shape}")
        if check:
            err = np.abs(r.T @ r - np.eye(3)).max()
            if err > ORTHONORMALITY_TOL:
                raise InvalidRotationError(
                    f"matrix is not orthonormal (max |R^T R - I| = {err:.3e})")
            det = np.linalg.det(r)
            if abs(det - 1.0) > ORTHONORMALITY_TOL:
                raise InvalidRotationError(f"det(R) = {det!r}, expected 1")
        r.setflags(write=False)
        self._r = r

    @property
    def matrix(self) -> np.ndarray:
        return self._r

    @classmethod
    def identity(cls) -> RotationMatrix:
        return cls(np.eye(3), check=False)

    @classmethod
    def from_yaw(cls, yaw: float) -> RotationMatrix:
        c, s = math.cos(yaw), math.sin(yaw)
        return cls(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]),
                   check=False)

    @classmethod
    def from_rpy(cls, roll: float, pitch: float, yaw: float) -> RotationMatrix:
        """ZYX convention: yaw about z, then pitch about y, then roll about x."""
        cr, sr = math.cos(roll), math.sin(roll)
        cp, sp = math.cos(pitch), math.sin(pitch)
        cy, sy = math.cos(yaw), math.sin(yaw)
        rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
        ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
        rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
        return cls(rz @ ry @ rx, check=False)

    @classmethod
    def from_axis_angle(cls, rotvec) -> RotationMatrix:
        """Rodrigues formula; rotvec = axis * angle, series for tiny angles."""
        w = np.asarray(rotvec, dtype=float)
        th = float(np.linalg.norm(w))
        wx = _hat(w)
        if th < 1e-8:
            r = np.eye(3) + wx + 0.5 * (wx @ wx)
        else:
            s = math.sin(th) / th
            c = (1.0 - math.cos(th)) / (th * th)
            r = np.eye(3) + s * wx + c * (wx @ wx)
        return cls(_project_to_rotation(r), check=False)

    def inverse(self) -> RotationMatrix:
        return RotationMatrix(self._r.T, check=False)

    def apply(self, v) -> np.ndarray:
        """Rotate a free vector: R @ v."""
        return self._r @ np.asarray(v, dtype=float)

    def __matmul__(self, other: RotationMatrix) -> RotationMatrix:
        return RotationMatrix(self._r @ other._r, check=False)

    def yaw(self) -> float:
        """Heading extracted from the first column's horizontal projection."""
        return math.atan2(self._r[1, 0], self._r[0, 0])

    def as_tuple9(self) -> tuple:
        """Row-major 9-tuple of floats, the wire format for the kernels."""
        r = self._r
        return (r[0, 0], r[0, 1], r[0, 2],
                r[1, 0], r[1, 1], r[1, 2],
                r[2, 0], r[2, 1], r[2, 2])

    def __repr__(self) -> str:
        return f"RotationMatrix({self._r.tolist()!r})"


def _hat(w: np.ndarray) -> np.ndarray:
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _project_to_rotation(m: np.ndarray) -> np.ndarray:
    """Nearest proper rotation in the Frobenius sense (SVD projection)."""
    u, _, vt = np.linalg.svd(m)
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


def rotation_angle(a: RotationMatrix, b: RotationMatrix) -> float:
    """Geodesic angle in radians between two rotations."""
    tr = float(np.trace(a.matrix.T @ b.matrix))
    return math.acos(min(1.0, max(-1.0, (tr - 1.0) * 0.5)))


@dataclass(frozen=True)
class Pose:
    """Position and orientation of a child frame in its parent frame."""

    position: np.ndarray
    orientation: RotationMatrix = field(default_factory=RotationMatrix.identity)

    def __post_init__(self):
        p = np.array(self.position, dtype=float).reshape(3)
        if not np.all(np.isfinite(p)):
            raise ValueError(f"pose position must be finite, got {p}")
        p.setflags(write=False)
        object.__setattr__(self, "position", p)

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.zeros(3), RotationMatrix.identity())

    @classmethod
    def from_yaw(cls, position, yaw: float) -> Pose:
        return cls(np.asarray(position, dtype=float), RotationMatrix.from_yaw(yaw))

    def transform_point(self, point) -> np.ndarray:
        """Child-frame point into the parent frame: R @ p + t."""
        return self.orientation.apply(point) + self.position

    def rotate(self, vector) -> np.ndarray:
        """Child-frame free vector into the parent frame (no translation)."""
        return self.orientation.apply(vector)


def compose(a: Pose, b: Pose) -> Pose:
    """Chain transforms: (a ∘ b) maps b's child frame into a's parent frame."""
    return Pose(a.transform_point(b.position), a.orientation @ b.orientation)


def inverse(p: Pose) -> Pose:
    rt = p.orientation.inverse()
    return Pose(-rt.apply(p.position), rt)


class RelativePosition(NamedTuple):
    """UAV position expressed in the target frame (x along the approach
    axis, y/z lateral)."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


def relative_position(position_world, world_from_target: Pose) -> RelativePosition:
    """Express a world-frame position in the target frame."""
    d = np.asarray(position_world, dtype=float) - world_from_target.position
    rel = world_from_target.orientation.matrix.T @ d
    return RelativePosition(float(rel[0]), float(rel[1]), float(rel[2]))


def to_target_frame(u_world, world_from_target: Pose) -> np.ndarray:
    """Rotate a free vector (e.g. a velocity) from world into the target
    frame: R^T @ u.  Translation does not apply to free vectors."""
    return world_from_target.orientation.matrix.T @ np.asarray(u_world, dtype=float)


def from_target_frame(u_target, world_from_target: Pose) -> np.ndarray:
    """Inverse of :func:`to_target_frame`: R @ u."""
    return world_from_target.orientation.apply(u_target)
