"""Frames, pinhole camera, oriented bounding boxes, and trajectory densification.

World frame convention: origin at the robot base on the table surface,
+y pointing away from the base, +z up, table top at z = 0. An end-effector
pose is 4-D: position plus yaw about the vertical axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class GeometryError(Exception):
    pass


class EmptyMask(GeometryError):
    pass


class InvalidDepth(GeometryError):
    pass


class EmptyInput(GeometryError):
    pass


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def wrap_half(a: float) -> float:
    """Wrap an angle to (-pi/2, pi/2] (rectangle symmetry)."""
    a = math.fmod(a, math.pi)
    if a <= -math.pi / 2.0:
        a += math.pi
    elif a > math.pi / 2.0:
        a -= math.pi
    return a


@dataclass(frozen=True)
class Pose:
    """4-D end-effector target: x, y, z in meters, yaw in radians.

    Yaw is wrapped to (-pi, pi] on construction; all coordinates must be
    finite.
    """

    x: float
    y: float
    z: float
    yaw: float = 0.0

    def __post_init__(self):
        for v in (self.x, self.y, self.z, self.yaw):
            if not math.isfinite(v):
                raise ValueError(f"non-finite pose component: {v!r}")
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def xyz(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def position_distance(self, other: "Pose") -> float:
        return math.dist(self.xyz, other.xyz)


class GripperCommand(Enum):
    OPEN = "open_gripper"
    CLOSE = "close_gripper"


TrajectoryElement = "Pose | GripperCommand"


@dataclass
class Trajectory:
    """Ordered poses and gripper commands, the pipeline's exchange value."""

    elements: list = field(default_factory=list)

    def poses(self) -> list[Pose]:
        return [e for e in self.elements if isinstance(e, Pose)]

    def commands(self) -> list[GripperCommand]:
        return [e for e in self.elements if isinstance(e, GripperCommand)]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus a rigid camera-to-world extrinsic transform."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    rotation: np.ndarray  # 3x3, camera -> world
    translation: np.ndarray  # 3, camera origin in world frame

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        r = np.asarray(self.rotation, dtype=float)
        if r.shape != (3, 3) or not np.allclose(r.T @ r, np.eye(3), atol=1e-9):
            raise ValueError("extrinsic rotation must be orthonormal")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))

    @classmethod
    def identity(cls, fx=600.0, fy=600.0, cx=320.0, cy=240.0, width=640, height=480):
        return cls(fx, fy, cx, cy, width, height, np.eye(3), np.zeros(3))

    def deproject(self, u: float, v: float, depth: float) -> np.ndarray:
        """Back-project one pixel at the given depth into the world frame."""
        p_cam = np.array(
            [(u - self.cx) / self.fx * depth, (v - self.cy) / self.fy * depth, depth]
        )
        return self.rotation @ p_cam + self.translation

    def project(self, point_world) -> tuple[float, float, float]:
        """Project a world point, returning (u, v, depth in camera frame)."""
        p_cam = self.rotation.T @ (np.asarray(point_world, dtype=float) - self.translation)
        d = p_cam[2]
        if d <= 0:
            raise ValueError("point is behind the camera")
        return (self.fx * p_cam[0] / d + self.cx, self.fy * p_cam[1] / d + self.cy, d)


@dataclass(frozen=True)
class BBox3D:
    """Yaw-oriented box: center position, yaw, and (w, l, h) dimensions.

    Canonical form: w <= l and yaw in (-pi/2, pi/2]; for squares the yaw
    with the smallest magnitude (positive on ties) is chosen.
    """

    position: tuple[float, float, float]
    yaw: float
    dimensions: tuple[float, float, float]

    def __post_init__(self):
        if any(d < 0 for d in self.dimensions):
            raise ValueError("dimensions must be non-negative")

    @property
    def w(self) -> float:
        return self.dimensions[0]

    @property
    def l(self) -> float:
        return self.dimensions[1]

    @property
    def h(self) -> float:
        return self.dimensions[2]

    @property
    def top(self) -> float:
        return self.position[2] + self.h / 2.0

    @property
    def bottom(self) -> float:
        return self.position[2] - self.h / 2.0

    def corners_xy(self) -> np.ndarray:
        """The four XY corners, counter-clockwise."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        hw, hl = self.w / 2.0, self.l / 2.0
        local = np.array([[hw, hl], [-hw, hl], [-hw, -hl], [hw, -hl]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array(self.position[:2])

    def contains_xy(self, x: float, y: float, slack: float = 0.0) -> bool:
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        dx, dy = x - self.position[0], y - self.position[1]
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        return abs(lx) <= self.w / 2.0 + slack and abs(ly) <= self.l / 2.0 + slack


def canonical_box(position, yaw: float, dimensions) -> BBox3D:
    """Normalize (yaw, w, l) to the canonical w <= l, yaw in (-pi/2, pi/2] form."""
    w, l, h = (float(d) for d in dimensions)
    position = tuple(float(p) for p in position)
    yaw = wrap_half(float(yaw))
    alt = wrap_half(yaw + math.pi / 2.0)
    if w > l:
        w, l, yaw = l, w, alt
    elif w == l:
        # Square: both representations valid; pick the smaller-magnitude yaw,
        # positive on an exact tie.
        if (abs(alt), -alt) < (abs(yaw), -yaw):
            yaw = alt
    return BBox3D(position, yaw, (w, l, h))


def deproject_mask(mask, depth, cam: CameraModel) -> np.ndarray:
    """Back-project every set mask pixel into the world frame.

    Returns an (N, 3) array of world points, one per set pixel, in
    row-major pixel order.
    """
    mask = np.asarray(mask, dtype=bool)
    depth = np.asarray(depth, dtype=float)
    expected = (cam.height, cam.width)
    if mask.shape != expected or depth.shape != expected:
        raise ValueError(f"mask/depth shape must be {expected}")
    vs, us = np.nonzero(mask)
    if len(us) == 0:
        raise EmptyMask("mask has no set pixels")
    d = depth[vs, us]
    if np.any(d <= 0):
        raise InvalidDepth("non-positive depth under a set mask pixel")
    p_cam = np.stack(
        [(us - cam.cx) / cam.fx * d, (vs - cam.cy) / cam.fy * d, d], axis=1
    )
    return p_cam @ cam.rotation.T + cam.translation


def _convex_hull_xy(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; handles collinear/duplicate degeneracies."""
    pts = np.unique(points[:, :2], axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def turn(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and turn(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    return hull if len(hull) >= 2 else pts


def _rect_at_angle(hull: np.ndarray, theta: float) -> tuple[float, float, float, np.ndarray]:
    """Area, extents and center of the theta-oriented enclosing rectangle."""
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, s], [-s, c]])  # world -> rect frame
    proj = hull @ rot.T
    lo = proj.min(axis=0)
    hi = proj.max(axis=0)
    ext = hi - lo
    center_local = (lo + hi) / 2.0
    center = rot.T @ center_local
    return ext[0] * ext[1], ext[0], ext[1], center


def fit_bbox3(points) -> BBox3D:
    """Fit the minimum-area yaw-oriented box around a world point set.

    The XY rectangle is the minimum-area enclosing rectangle of the XY
    convex hull (an optimal rectangle shares an edge direction with the
    hull, so only hull edge angles are tested); height spans the z extent.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise EmptyInput("cannot fit a box around zero points")
    if pts.shape[1] != 3:
        raise ValueError("expected (N, 3) points")
    z_min, z_max = pts[:, 2].min(), pts[:, 2].max()
    hull = _convex_hull_xy(pts)
    if len(hull) == 1:
        return canonical_box((hull[0][0], hull[0][1], (z_min + z_max) / 2.0), 0.0,
                             (0.0, 0.0, z_max - z_min))
    edges = np.diff(np.vstack([hull, hull[:1]]), axis=0) if len(hull) > 2 else np.diff(hull, axis=0)
    angles = {wrap_half(math.atan2(e[1], e[0])) for e in edges if e[0] != 0 or e[1] != 0}
    candidates = [(*_rect_at_angle(hull, theta), theta) for theta in sorted(angles)]
    best_area = min(c[0] for c in candidates)
    # Distinct rectangles can tie in area to within float noise (e.g. a right
    # triangle's leg- and hypotenuse-aligned boxes); picking the one with the
    # longest side keeps the result equivariant under input rotation.
    finalists = [c for c in candidates if c[0] <= best_area + 1e-12]
    _, ew, el, center, theta = max(
        finalists, key=lambda c: (max(c[1], c[2]), min(c[1], c[2]))
    )
    return canonical_box((center[0], center[1], (z_min + z_max) / 2.0), theta,
                         (ew, el, z_max - z_min))


def interpolate_linear(a: Pose, b: Pose, pos_step: float = 0.01,
                       yaw_step: float = 0.05) -> list[Pose]:
    """Linearly subdivide a -> b so that consecutive poses are at most
    pos_step apart in position and yaw_step apart along the shortest arc.

    Endpoints are included; a == b yields [a]. A yaw gap of exactly pi is
    traversed in the positive direction.
    """
    if pos_step <= 0 or yaw_step <= 0:
        raise ValueError("steps must be positive")
    dyaw = wrap_angle(b.yaw - a.yaw)
    dist = a.position_distance(b)
    if dist == 0.0 and dyaw == 0.0:
        return [a]
    # Tiny slack absorbs float noise in the ratio so e.g. a 0.1 m gap at
    # step 0.01 yields exactly 10 subdivisions.
    n = max(
        math.ceil(dist / pos_step - 1e-9),
        math.ceil(abs(dyaw) / yaw_step - 1e-9),
        1,
    )
    out = []
    for i in range(n + 1):
        t = i / n
        out.append(
            Pose(
                a.x + (b.x - a.x) * t,
                a.y + (b.y - a.y) * t,
                a.z + (b.z - a.z) * t,
                wrap_angle(a.yaw + dyaw * t),
            )
        )
    out[0] = a
    out[-1] = b
    return out


def densify(waypoints: Trajectory, pos_step: float = 0.01,
            yaw_step: float = 0.05) -> Trajectory:
    """Expand every consecutive pose pair with interpolate_linear, keeping
    gripper commands at their original positions and deduplicating the
    shared endpoints."""
    if not waypoints.elements:
        raise ValueError("waypoints must be non-empty")
    out: list = []
    last_pose: Pose | None = None
    for el in waypoints:
        if isinstance(el, GripperCommand):
            out.append(el)
            continue
        if last_pose is None:
            out.append(el)
        else:
            out.extend(interpolate_linear(last_pose, el, pos_step, yaw_step)[1:])
        last_pose = el
    return Trajectory(out)
