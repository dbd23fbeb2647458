"""Deterministic kinematic tabletop world.

Stands in for the robot, cameras and vision models: scene construction with
seeded randomization, gripper motion with box-sweep pushing, attachment-based
grasping, a ground-truth detection oracle with optional Gaussian noise, and
per-tick track recording. There is no dynamics engine: grasping is rigid
attachment, dropped objects settle instantly on their support, and pushed
objects are displaced along the sweep direction until the boxes separate.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import BBox3D, Pose, canonical_box, wrap_angle

# Reachable volume; poses outside are clamped and the violation recorded.
WORKSPACE = {"x": (-0.4, 0.4), "y": (0.1, 0.7), "z": (0.0, 0.5)}

HOME_POSE = Pose(0.0, 0.3, 0.4, 0.0)

# Grasp acceptance: grasp point within these offsets of the gripper, and
# object width along the closing axis within the 2F-85 stroke.
GRASP_XY_TOL = 0.02
GRASP_Z_TOL = 0.04
MAX_GRASP_WIDTH = 0.085

# Collision proxy for the gripper: footprint half-extents and finger length.
GRIPPER_HALF_XY = (0.01, 0.01)
GRIPPER_HEIGHT = 0.08

COLLISION_LOG_DEPTH = 0.001  # interpenetration beyond 1 mm gets logged

TRACK_SAMPLE_CAP = 20

PLACEMENT_BUDGET = 1000


class SimulatorError(Exception):
    pass


class PlacementInfeasible(SimulatorError):
    pass


class ObjectNotFound(SimulatorError):
    pass


@dataclass(frozen=True)
class Part:
    """Named sub-box in the object frame (a graspable patch such as a rim)."""

    offset: tuple[float, float, float]
    dimensions: tuple[float, float, float]
    yaw: float = 0.0


@dataclass(frozen=True)
class Cavity:
    """Open interior region: things whose footprint fits inside rest on its
    floor instead of on top of the object."""

    offset: tuple[float, float]
    dimensions: tuple[float, float]
    floor: float  # height of the cavity floor above the object's bottom face


@dataclass
class SceneObject:
    name: str
    shape: str  # "box" | "cylinder"
    dimensions: tuple  # box: (w, l, h); cylinder: (radius, height)
    pose: Pose
    graspable: bool = False
    movable: bool = True
    parts: dict[str, Part] = field(default_factory=dict)
    cavities: list[Cavity] = field(default_factory=list)
    anchor: str | None = None  # placed relative to this object at reset

    def __post_init__(self):
        if self.shape not in ("box", "cylinder"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if any(d <= 0 for d in self.dimensions):
            raise ValueError("dimensions must be positive")

    @property
    def footprint(self) -> tuple[float, float]:
        if self.shape == "cylinder":
            return (2 * self.dimensions[0], 2 * self.dimensions[0])
        return (self.dimensions[0], self.dimensions[1])

    @property
    def height(self) -> float:
        return self.dimensions[-1]

    @property
    def top(self) -> float:
        return self.pose.z + self.height / 2.0

    @property
    def bottom(self) -> float:
        return self.pose.z - self.height / 2.0

    def bbox(self) -> BBox3D:
        w, l = self.footprint
        return canonical_box(self.pose.xyz, self.pose.yaw, (w, l, self.height))

    def track_box(self) -> BBox3D:
        """Box with the raw pose yaw (not folded by rectangle symmetry);
        rotation checkers need the full orientation history."""
        w, l = self.footprint
        return BBox3D(self.pose.xyz, self.pose.yaw, (w, l, self.height))

    def part_bbox(self, part_name: str) -> BBox3D:
        part = self.parts[part_name]
        c, s = math.cos(self.pose.yaw), math.sin(self.pose.yaw)
        ox, oy, oz = part.offset
        return canonical_box(
            (self.pose.x + c * ox - s * oy, self.pose.y + s * ox + c * oy,
             self.pose.z + oz),
            self.pose.yaw + part.yaw,
            part.dimensions,
        )


@dataclass
class TaskScene:
    task_id: str
    instruction: str
    objects: list[SceneObject]
    randomization: dict[str, dict]  # name -> {"x": [lo,hi], "y": [lo,hi], "yaw": [lo,hi]}
    checker: dict  # {"id": ..., "params": {...}}
    criterion: str = ""
    proxy_notes: str = ""

    def __post_init__(self):
        if not self.instruction:
            raise ValueError("instruction must be non-empty")
        for name, ranges in self.randomization.items():
            if name not in {o.name for o in self.objects}:
                raise ValueError(f"randomization for unknown object {name!r}")
            for axis in ("x", "y"):
                if axis not in ranges:
                    continue
                lo, hi = ranges[axis]
                wlo, whi = WORKSPACE[axis]
                if lo < wlo or hi > whi:
                    raise ValueError(f"{name} {axis} range outside the workspace")


@dataclass
class Snapshot:
    """One recorded simulator tick."""

    tick: int
    gripper: Pose
    gripper_open: bool
    objects: dict[str, BBox3D]
    detected: frozenset[str]


@dataclass
class SimState:
    objects: dict[str, SceneObject]
    gripper: Pose
    gripper_open: bool
    attached: tuple[str, tuple] | None  # (name, (dx, dy, dz, dyaw) in gripper frame)
    tick: int
    detected: set[str] = field(default_factory=set)
    collisions: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)


@dataclass
class ObjectTracks:
    """Downsampled per-object box series plus the gripper series."""

    objects: dict[str, list[tuple[int, BBox3D]]]
    gripper: list[tuple[int, Pose, bool]]


# ── Oriented rectangle helpers (SAT) ─────────────────────────────────────

def _rect_axes(yaw: float) -> list[tuple[float, float]]:
    c, s = math.cos(yaw), math.sin(yaw)
    return [(c, s), (-s, c)]


def _rect_corners(cx, cy, yaw, hw, hl) -> list[tuple[float, float]]:
    ax, ay = _rect_axes(yaw)
    return [
        (cx + sx * hw * ax[0] + sy * hl * ay[0], cy + sx * hw * ax[1] + sy * hl * ay[1])
        for sx in (1, -1) for sy in (1, -1)
    ]


def _project(corners, axis) -> tuple[float, float]:
    vals = [c[0] * axis[0] + c[1] * axis[1] for c in corners]
    return min(vals), max(vals)


def rect_penetration(a, b) -> float:
    """Penetration depth of two oriented XY rectangles (cx, cy, yaw, hw, hl).

    Positive means overlap; <= 0 means separated (SAT over both rects' axes).
    """
    ca, cb = _rect_corners(*a), _rect_corners(*b)
    depth = math.inf
    for axis in _rect_axes(a[2]) + _rect_axes(b[2]):
        lo_a, hi_a = _project(ca, axis)
        lo_b, hi_b = _project(cb, axis)
        pen = min(hi_a, hi_b) - max(lo_a, lo_b)
        if pen <= 0:
            return pen
        depth = min(depth, pen)
    return depth


def _escape_distance(mover, obstacle, direction) -> float:
    """Minimal t >= 0 such that shifting `obstacle` by t*direction separates
    it from `mover` on some SAT axis."""
    cm, co = _rect_corners(*mover), _rect_corners(*obstacle)
    best = math.inf
    for axis in _rect_axes(mover[2]) + _rect_axes(obstacle[2]):
        d_dot = direction[0] * axis[0] + direction[1] * axis[1]
        lo_m, hi_m = _project(cm, axis)
        lo_o, hi_o = _project(co, axis)
        if d_dot > 1e-12:
            t = (hi_m - lo_o) / d_dot
        elif d_dot < -1e-12:
            t = (hi_o - lo_m) / -d_dot
        else:
            continue
        if 0 <= t < best:
            best = t
    return best


def _point_in_rect(px, py, rect, slack=0.0) -> bool:
    cx, cy, yaw, hw, hl = rect
    c, s = math.cos(yaw), math.sin(yaw)
    dx, dy = px - cx, py - cy
    return abs(c * dx + s * dy) <= hw + slack and abs(-s * dx + c * dy) <= hl + slack


def support_width_along(yaw_obj, w, l, axis_angle) -> float:
    """Extent of a (w, l) rectangle measured along a world direction."""
    d = yaw_obj - axis_angle
    return w * abs(math.cos(d)) + l * abs(math.sin(d))


# ── Simulator ────────────────────────────────────────────────────────────

class Simulator:
    """One episode's world. Reset is a deterministic function of
    (scene, seed); all motion goes through step_to / set_gripper."""

    def __init__(self, scene: TaskScene, noise_sigma: float = 0.0):
        self.scene = scene
        self.noise_sigma = noise_sigma
        self.state: SimState | None = None
        self._history: list[Snapshot] = []
        self._detect_rng: np.random.Generator | None = None

    # -- lifecycle --

    def reset(self, seed: int) -> SimState:
        rng = np.random.default_rng([int(seed), 7])
        self._detect_rng = np.random.default_rng([int(seed), 101])
        placed: dict[str, SceneObject] = {}
        budget = PLACEMENT_BUDGET
        for template in self.scene.objects:
            obj = replace(template, parts=dict(template.parts),
                          cavities=list(template.cavities))
            ranges = self.scene.randomization.get(obj.name)
            while True:
                pose = self._sample_pose(obj, ranges, placed, rng)
                candidate = replace(obj, pose=pose)
                if self._placement_ok(candidate, placed):
                    placed[obj.name] = candidate
                    break
                budget -= 1
                if budget <= 0:
                    raise PlacementInfeasible(
                        f"could not place {obj.name!r} without overlap after "
                        f"{PLACEMENT_BUDGET} rejected samples"
                    )
        self.state = SimState(
            objects=placed, gripper=HOME_POSE, gripper_open=True,
            attached=None, tick=0,
        )
        self._history = []
        self._record()
        return self.state

    def _sample_pose(self, obj, ranges, placed, rng) -> Pose:
        if obj.anchor is not None:
            if obj.anchor not in placed:
                raise SimulatorError(
                    f"{obj.name!r} is anchored to {obj.anchor!r}, which must be "
                    "listed before it in the scene"
                )
            base = placed[obj.anchor].pose
            c, s = math.cos(base.yaw), math.sin(base.yaw)
            return Pose(
                base.x + c * obj.pose.x - s * obj.pose.y,
                base.y + s * obj.pose.x + c * obj.pose.y,
                obj.pose.z,
                base.yaw + obj.pose.yaw,
            )
        if not ranges:
            return obj.pose
        x = rng.uniform(*ranges.get("x", (obj.pose.x, obj.pose.x)))
        y = rng.uniform(*ranges.get("y", (obj.pose.y, obj.pose.y)))
        yaw = rng.uniform(*ranges.get("yaw", (obj.pose.yaw, obj.pose.yaw)))
        return Pose(x, y, obj.pose.z, yaw)

    def _placement_ok(self, candidate: SceneObject, placed) -> bool:
        for other in placed.values():
            if candidate.anchor == other.name or other.anchor == candidate.name:
                continue
            if rect_penetration(self._obj_rect(candidate), self._obj_rect(other)) > 0:
                return False
        return True

    # -- motion --

    def step_to(self, target: Pose) -> SimState:
        st = self._require_state()
        clamped = self._clamp(target)
        if clamped != target:
            st.violations.append(
                {"tick": st.tick + 1, "kind": "workspace",
                 "target": [target.x, target.y, target.z, target.yaw]}
            )
        previous = st.gripper
        st.gripper = clamped
        st.tick += 1
        if st.attached is not None:
            name, rel = st.attached
            st.objects[name].pose = self._compose(clamped, rel)
        self._resolve_contacts(previous, clamped)
        self._record()
        return st

    def set_gripper(self, open_: bool) -> SimState:
        st = self._require_state()
        st.tick += 1
        if open_ and not st.gripper_open:
            if st.attached is not None:
                name, _ = st.attached
                st.attached = None
                self._settle(st.objects[name])
            st.gripper_open = True
        elif not open_ and st.gripper_open:
            st.gripper_open = False
            grabbed = self._find_grasp(st.gripper)
            if grabbed is not None:
                st.attached = (grabbed, self._relative(st.gripper, st.objects[grabbed].pose))
        self._record()
        return st

    # -- perception --

    def detect_object(self, query: str) -> BBox3D:
        st = self._require_state()
        tokens = set(_tokenize(query))
        if not tokens:
            raise ObjectNotFound(f"object not found: {query}")
        best = None
        for obj in st.objects.values():
            candidates = [(_tokenize(obj.name), None)]
            for part_name in obj.parts:
                candidates.append((_tokenize(f"{obj.name} {part_name}"), part_name))
            for cand_tokens, part_name in candidates:
                overlap = len(tokens & set(cand_tokens))
                if overlap == 0:
                    continue
                key = (overlap, -len(cand_tokens))
                if best is None or key > best[0]:
                    best = (key, obj, part_name)
        if best is None:
            raise ObjectNotFound(f"object not found: {query}")
        _, obj, part_name = best
        st.detected.add(obj.name)
        box = obj.part_bbox(part_name) if part_name else obj.bbox()
        return self._noisy(box)

    def _noisy(self, box: BBox3D) -> BBox3D:
        if self.noise_sigma <= 0:
            return box
        rng = self._detect_rng
        pos = np.array(box.position) + rng.normal(0.0, self.noise_sigma, 3)
        dims = np.array(box.dimensions) + rng.normal(0.0, self.noise_sigma, 3)
        dims = np.maximum(dims, 0.001)
        return canonical_box(tuple(pos), box.yaw, tuple(dims))

    # -- recording --

    def tracks(self) -> ObjectTracks:
        return build_tracks(self._history)

    @property
    def history(self) -> list[Snapshot]:
        return self._history

    def _record(self):
        st = self.state
        self._history.append(
            Snapshot(
                tick=st.tick,
                gripper=st.gripper,
                gripper_open=st.gripper_open,
                objects={name: obj.track_box() for name, obj in st.objects.items()},
                detected=frozenset(st.detected),
            )
        )

    # -- internals --

    def _require_state(self) -> SimState:
        if self.state is None:
            raise SimulatorError("reset() must be called first")
        return self.state

    @staticmethod
    def _clamp(pose: Pose) -> Pose:
        x = min(max(pose.x, WORKSPACE["x"][0]), WORKSPACE["x"][1])
        y = min(max(pose.y, WORKSPACE["y"][0]), WORKSPACE["y"][1])
        z = min(max(pose.z, WORKSPACE["z"][0]), WORKSPACE["z"][1])
        if (x, y, z) == (pose.x, pose.y, pose.z):
            return pose
        return Pose(x, y, z, pose.yaw)

    @staticmethod
    def _relative(gripper: Pose, obj: Pose) -> tuple:
        c, s = math.cos(-gripper.yaw), math.sin(-gripper.yaw)
        dx, dy = obj.x - gripper.x, obj.y - gripper.y
        return (c * dx - s * dy, s * dx + c * dy, obj.z - gripper.z,
                wrap_angle(obj.yaw - gripper.yaw))

    @staticmethod
    def _compose(gripper: Pose, rel: tuple) -> Pose:
        c, s = math.cos(gripper.yaw), math.sin(gripper.yaw)
        return Pose(
            gripper.x + c * rel[0] - s * rel[1],
            gripper.y + s * rel[0] + c * rel[1],
            gripper.z + rel[2],
            wrap_angle(gripper.yaw + rel[3]),
        )

    def _obj_rect(self, obj: SceneObject):
        w, l = obj.footprint
        return (obj.pose.x, obj.pose.y, obj.pose.yaw, w / 2.0, l / 2.0)

    def _gripper_rect(self, pose: Pose):
        return (pose.x, pose.y, pose.yaw, GRIPPER_HALF_XY[0], GRIPPER_HALF_XY[1])

    def _inside_cavity(self, rect, obj: SceneObject) -> bool:
        for cavity in obj.cavities:
            c, s = math.cos(obj.pose.yaw), math.sin(obj.pose.yaw)
            ox, oy = cavity.offset
            cav_rect = (
                obj.pose.x + c * ox - s * oy, obj.pose.y + s * ox + c * oy,
                obj.pose.yaw, cavity.dimensions[0] / 2.0, cavity.dimensions[1] / 2.0,
            )
            if all(_point_in_rect(px, py, cav_rect) for px, py in _rect_corners(*rect)):
                return True
        return False

    def _resolve_contacts(self, previous: Pose, current: Pose):
        st = self.state
        dx, dy = current.x - previous.x, current.y - previous.y
        sweep = math.hypot(dx, dy)
        direction = (dx / sweep, dy / sweep) if sweep > 1e-12 else None
        # Pushed objects never move farther than the gripper did this tick;
        # leftover penetration resolves over the following ticks.
        step_len = previous.position_distance(current)

        movers: list[tuple[str, tuple, tuple[float, float]]] = [
            ("gripper", self._gripper_rect(current),
             (current.z, current.z + GRIPPER_HEIGHT)),
        ]
        if st.attached is not None:
            carried = st.objects[st.attached[0]]
            movers.append(
                (carried.name, self._obj_rect(carried), (carried.bottom, carried.top))
            )

        for obj in st.objects.values():
            if st.attached is not None and obj.name == st.attached[0]:
                continue
            rect = self._obj_rect(obj)
            z_lo, z_hi = obj.bottom, obj.top
            for mover_name, mover_rect, (m_lo, m_hi) in movers:
                z_pen = min(m_hi, z_hi) - max(m_lo, z_lo)
                if z_pen <= 0:
                    continue
                if self._inside_cavity(mover_rect, obj):
                    continue
                xy_pen = rect_penetration(mover_rect, rect)
                if xy_pen <= 0:
                    continue
                if min(xy_pen, z_pen) > COLLISION_LOG_DEPTH:
                    st.collisions.append(
                        {"tick": st.tick, "mover": mover_name, "object": obj.name}
                    )
                if obj.movable and direction is not None:
                    t = min(_escape_distance(mover_rect, rect, direction), step_len)
                    if math.isfinite(t) and t > 0:
                        obj.pose = Pose(
                            obj.pose.x + direction[0] * t,
                            obj.pose.y + direction[1] * t,
                            obj.pose.z, obj.pose.yaw,
                        )

    def _find_grasp(self, gripper: Pose) -> str | None:
        st = self.state
        best = None
        for obj in st.objects.values():
            if not obj.graspable:
                continue
            point = self._grasp_point(obj, gripper)
            if point is None:
                continue
            d = math.hypot(point[0] - gripper.x, point[1] - gripper.y)
            if best is None or d < best[0]:
                best = (d, obj.name)
        return best[1] if best else None

    def _grasp_point(self, obj: SceneObject, gripper: Pose):
        def reachable(px, py, pz, width):
            return (
                math.hypot(px - gripper.x, py - gripper.y) <= GRASP_XY_TOL
                and abs(pz - gripper.z) <= GRASP_Z_TOL
                and width <= MAX_GRASP_WIDTH
            )

        for part_name in obj.parts:
            box = obj.part_bbox(part_name)
            width = support_width_along(box.yaw, box.w, box.l, gripper.yaw)
            if reachable(*box.position, width):
                return box.position
        w, l = obj.footprint
        width = support_width_along(obj.pose.yaw, w, l, gripper.yaw)
        if reachable(obj.pose.x, obj.pose.y, obj.pose.z, width):
            return obj.pose.xyz
        return None

    def _settle(self, obj: SceneObject):
        st = self.state
        support = 0.0
        rect = self._obj_rect(obj)
        for other in st.objects.values():
            if other.name == obj.name:
                continue
            if self._inside_cavity(rect, other):
                support = max(support, other.bottom + max(c.floor for c in other.cavities))
            elif _point_in_rect(obj.pose.x, obj.pose.y, self._obj_rect(other)):
                support = max(support, other.top)
        obj.pose = Pose(obj.pose.x, obj.pose.y, support + obj.height / 2.0, obj.pose.yaw)


def _tokenize(text: str) -> list[str]:
    return re.findall(r"[a-z0-9]+", text.lower())


def build_tracks(history: list[Snapshot]) -> ObjectTracks:
    """Assemble per-object track series from recorded snapshots, uniformly
    downsampled to at most TRACK_SAMPLE_CAP samples with endpoints kept.

    Only objects detected during the episode are tracked; if nothing was
    ever queried (e.g. numeric-mode episodes) every object is tracked.
    """
    if not history:
        raise ValueError("no recorded states")
    detected = set().union(*(s.detected for s in history))
    names = sorted(detected) if detected else sorted(history[0].objects)
    idx = _downsample_indices(len(history), TRACK_SAMPLE_CAP)
    objects = {
        name: [(history[i].tick, history[i].objects[name]) for i in idx
               if name in history[i].objects]
        for name in names
    }
    gripper = [(s.tick, s.gripper, s.gripper_open) for s in history]
    return ObjectTracks(objects=objects, gripper=gripper)


def _downsample_indices(n: int, cap: int) -> list[int]:
    if n <= cap:
        return list(range(n))
    return sorted({int(round(v)) for v in np.linspace(0, n - 1, cap)})
