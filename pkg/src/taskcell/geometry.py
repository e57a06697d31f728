"""Poses, quaternions and small vector helpers.

Conventions: the table frame is the single world frame (origin at the table
center, z up, meters). Orientations are unit quaternions in (w, x, y, z)
order. Tool frame equals model frame at identity orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec3 = tuple[float, float, float]

UNIT_TOLERANCE = 1e-9


def vec3(x: float, y: float, z: float) -> Vec3:
    return (float(x), float(y), float(z))


def vadd(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vsub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vscale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def vdot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vcross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def vnorm(a: Vec3) -> float:
    return math.sqrt(vdot(a, a))


def vunit(a: Vec3) -> Vec3:
    n = vnorm(a)
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    return (a[0] / n, a[1] / n, a[2] / n)


def vfinite(a: Vec3) -> bool:
    return all(math.isfinite(c) for c in a)


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion (w, x, y, z). Normalized on construction."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.w, self.x, self.y, self.z)):
            raise ValueError("quaternion components must be finite")
        n = math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)
        if n == 0.0:
            raise ValueError("zero quaternion has no orientation")
        if abs(n - 1.0) > UNIT_TOLERANCE:
            object.__setattr__(self, "w", self.w / n)
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Quaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v: Vec3) -> Vec3:
        # q v q* without building intermediate quaternions
        w, x, y, z = self.w, self.x, self.y, self.z
        tx = 2.0 * (y * v[2] - z * v[1])
        ty = 2.0 * (z * v[0] - x * v[2])
        tz = 2.0 * (x * v[1] - y * v[0])
        return (
            v[0] + w * tx + (y * tz - z * ty),
            v[1] + w * ty + (z * tx - x * tz),
            v[2] + w * tz + (x * ty - y * tx),
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    @staticmethod
    def from_axis_angle(axis: Vec3, angle: float) -> "Quaternion":
        u = vunit(axis)
        h = angle / 2.0
        s = math.sin(h)
        return Quaternion(math.cos(h), u[0] * s, u[1] * s, u[2] * s)

    @staticmethod
    def rotation_between(a: Vec3, b: Vec3) -> "Quaternion":
        """Minimal rotation carrying unit vector a onto unit vector b.

        The antiparallel case has no unique minimal rotation; a fixed
        perpendicular axis is chosen so the result is deterministic.
        """
        ua, ub = vunit(a), vunit(b)
        d = vdot(ua, ub)
        if d >= 1.0 - 1e-12:
            return IDENTITY
        if d <= -1.0 + 1e-12:
            helper = (1.0, 0.0, 0.0) if abs(ua[0]) < 0.9 else (0.0, 1.0, 0.0)
            axis = vunit(vcross(ua, helper))
            return Quaternion.from_axis_angle(axis, math.pi)
        axis = vcross(ua, ub)
        return Quaternion.from_axis_angle(axis, math.acos(max(-1.0, min(1.0, d))))


IDENTITY = Quaternion(1.0, 0.0, 0.0, 0.0)
# 180 degrees about x: tool z axis points into the table (straight down).
DOWN = Quaternion(0.0, 1.0, 0.0, 0.0)


@dataclass(frozen=True)
class Pose6D:
    """TCP pose: position in meters plus unit-quaternion orientation."""

    position: Vec3
    orientation: Quaternion = IDENTITY

    def __post_init__(self):
        pos = vec3(*self.position)
        if not vfinite(pos):
            raise ValueError("pose position must be finite")
        object.__setattr__(self, "position", pos)

    def transform(self, p: Vec3) -> Vec3:
        """Map a point from this pose's local frame into the world frame."""
        return vadd(self.position, self.orientation.rotate(p))

    def compose(self, other: "Pose6D") -> "Pose6D":
        """This pose applied after ``other`` expressed in this pose's frame."""
        return Pose6D(self.transform(other.position), self.orientation * other.orientation)


@dataclass(frozen=True)
class Location3D:
    """A point on (or above) the table plane, in the table frame."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError("location components must be finite")
        if self.z < 0.0:
            raise ValueError("on-table locations require z >= 0")

    def as_vec(self) -> Vec3:
        return (self.x, self.y, self.z)


def point_line_distance(p: Vec3, line_point: Vec3, line_dir: Vec3) -> float:
    """Distance from p to the infinite line through line_point along line_dir."""
    d = vunit(line_dir)
    rel = vsub(p, line_point)
    along = vscale(d, vdot(rel, d))
    return vnorm(vsub(rel, along))
