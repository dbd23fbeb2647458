#!/usr/bin/env python3
"""Writes one hand-authored passing and one failing episode log per catalog
task, under src/trajbench/tasks/calibration/<task>/{pass,fail}.jsonl. These
are synthetic geometric paths exercising the checkers directly; re-run after
editing."""

import json
import math
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from trajbench.catalog import load_all_tasks  # noqa: E402

OUT = ROOT / "src" / "trajbench" / "tasks" / "calibration"


def lerp_path(keypoints, per_leg=12):
    pts = []
    for a, b in zip(keypoints, keypoints[1:]):
        for i in range(per_leg):
            t = i / per_leg
            pts.append(tuple(a[j] + (b[j] - a[j]) * t for j in range(len(a))))
    pts.append(tuple(keypoints[-1]))
    return pts


class LogBuilder:
    """Builds tick records from per-object pose series."""

    def __init__(self, scene):
        self.dims = {}
        self.base = {}
        for obj in scene.objects:
            if obj.shape == "cylinder":
                w = l = 2 * obj.dimensions[0]
                h = obj.dimensions[1]
            else:
                w, l, h = obj.dimensions
            self.dims[obj.name] = [w, l, h]
            pose = [obj.pose.x, obj.pose.y, obj.pose.z, obj.pose.yaw]
            if obj.anchor:  # template pose is an offset from the anchor
                ax, ay, _, ayaw = self.base[obj.anchor]
                c, s = math.cos(ayaw), math.sin(ayaw)
                pose = [ax + c * pose[0] - s * pose[1],
                        ay + s * pose[0] + c * pose[1], pose[2], ayaw + pose[3]]
            self.base[obj.name] = pose
        self.records = [{"type": "attempt", "index": 0}]
        self.tick = 0

    def emit(self, overrides=None, gripper=(0.0, 0.3, 0.4, 0.0), gripper_open=True):
        objects = {}
        for name, base in self.base.items():
            pose = (overrides or {}).get(name, base)
            objects[name] = {
                "position": [pose[0], pose[1], pose[2]],
                "orientation": pose[3],
                "dimensions": self.dims[name],
            }
        self.records.append({
            "type": "tick", "tick": self.tick,
            "gripper": list(gripper), "gripper_open": gripper_open,
            "objects": objects,
        })
        self.tick += 1

    def move_object(self, name, keypoints, per_leg=12):
        for pose in lerp_path(keypoints, per_leg):
            self.emit({name: list(pose)})

    def write(self, path):
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec) + "\n")


def start_pose(builder, name):
    return list(builder.base[name])


def lift_logs(scene, target, good=0.15, bad=0.05):
    for height, kind in ((good, "pass"), (bad, "fail")):
        b = LogBuilder(scene)
        b.emit()
        p0 = start_pose(b, target)
        top = p0[:2] + [p0[2] + height, p0[3]]
        b.move_object(target, [p0, top])
        yield kind, b


def slide(pose, dx=0.0, dy=0.0, dz=0.0):
    return [pose[0] + dx, pose[1] + dy, pose[2] + dz, pose[3]]


def build_task_logs(task_id, scene):
    checker = scene.checker
    cid = checker["id"]
    p = checker.get("params", {})
    out = {}

    if cid == "lift":
        for kind, b in lift_logs(scene, p["target"]):
            out[kind] = b
    elif cid == "push_any":
        t = p["target"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            if kind == "pass":
                b.move_object(t, [p0, slide(p0, dx=0.15)])
            else:
                # displaced far enough but lifted mid-way: not a push
                b.move_object(t, [p0, slide(p0, dx=0.07, dz=0.05),
                                  slide(p0, dx=0.15)])
            out[kind] = b
    elif cid in ("proximity", "push_to"):
        t, ref = p["target"], p["reference"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            r0 = start_pose(b, ref)
            gap = 0.042 if kind == "pass" else 0.12
            lifted = 0.0 if cid == "push_to" else 0.1
            goal = [r0[0] - gap, r0[1], p0[2], p0[3]]
            if cid == "push_to" and kind == "fail":
                # ends close enough but was carried through the air
                b.move_object(t, [p0, slide(p0, dz=0.1),
                                  [goal[0], goal[1], p0[2] + 0.1, p0[3]], goal])
            elif cid == "push_to":
                b.move_object(t, [p0, goal])
            else:
                b.move_object(t, [p0, slide(p0, dz=lifted),
                                  [goal[0], goal[1], p0[2] + lifted, p0[3]], goal])
            out[kind] = b
    elif cid == "near_edge":
        t = p["target"]
        for kind, y_final in (("pass", 0.15), ("fail", 0.40)):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            b.move_object(t, [p0, slide(p0, dz=0.1),
                              [p0[0], y_final, p0[2] + 0.1, p0[3]],
                              [p0[0], y_final, p0[2], p0[3]]])
            out[kind] = b
    elif cid == "lonely_join":
        names = [o.name for o in scene.objects]
        lonely = "yellow cube"
        anchor = "red cube"
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, lonely)
            a0 = start_pose(b, anchor)
            if kind == "pass":
                goal = [a0[0] - 0.045, a0[1], p0[2], p0[3]]
                b.move_object(lonely, [p0, slide(p0, dz=0.1),
                                       [goal[0], goal[1], p0[2] + 0.1, p0[3]], goal])
            else:
                b.move_object(lonely, [p0, slide(p0, dx=0.02)])
            out[kind] = b
        del names
    elif cid == "push_direction":
        t = p["target"]
        sign = p.get("sign", 1)
        for kind, d in (("pass", 0.15 * sign), ("fail", -0.15 * sign)):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            b.move_object(t, [p0, slide(p0, dx=d)])
            out[kind] = b
    elif cid == "move_direction":
        t = p["target"]
        sign = p.get("sign", 1)
        for kind, d in (("pass", 0.15 * sign), ("fail", 0.05 * sign)):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            b.move_object(t, [p0, slide(p0, dz=0.08),
                              [p0[0] + d, p0[1], p0[2] + 0.08, p0[3]],
                              [p0[0] + d, p0[1], p0[2], p0[3]]])
            out[kind] = b
    elif cid == "touch":
        t, ref = p["target"], p["reference"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            r0 = start_pose(b, ref)
            if kind == "pass":
                goal = [r0[0] - 0.05, r0[1], p0[2], p0[3]]
            else:
                goal = [r0[0] - 0.12, r0[1], p0[2], p0[3]]
            b.move_object(t, [p0, goal])
            out[kind] = b
    elif cid == "containment":
        t, c = p["target"], p["container"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            c0 = start_pose(b, c)
            ch = b.dims[c][2]
            th = b.dims[t][2]
            if kind == "pass":
                goal = [c0[0], c0[1], c0[2] - ch / 2 + 0.01 + th / 2, p0[3]]
            else:  # perched on top of the container instead of inside
                goal = [c0[0], c0[1], c0[2] + ch / 2 + th / 2, p0[3]]
            b.move_object(t, [p0, slide(p0, dz=0.25),
                              [goal[0], goal[1], p0[2] + 0.25, p0[3]], goal])
            out[kind] = b
    elif cid == "removed_to_table":
        t, c = p["target"], p["container"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            th = b.dims[t][2]
            if kind == "pass":
                goal = [0.25, 0.55, th / 2, p0[3]]
                b.move_object(t, [p0, slide(p0, dz=0.2),
                                  [0.25, 0.55, p0[2] + 0.2, p0[3]], goal])
            else:
                b.move_object(t, [p0, slide(p0, dz=0.002), p0])
            out[kind] = b
    elif cid in ("wipe_on", "wipe_avoid"):
        tool = p["tool"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            t0 = start_pose(b, tool)
            th = b.dims[tool][2]
            if cid == "wipe_on":
                s0 = start_pose(b, p["surface"])
                sh = b.dims[p["surface"]][2]
                z = s0[2] + sh / 2 + th / 2  # riding on the surface
                cxy = s0[:2]
            else:
                z = th / 2  # riding on the table
                cxy = [-0.2, 0.45]
            zig = [
                [cxy[0] - 0.05, cxy[1] - 0.04, z, 0.0],
                [cxy[0] + 0.05, cxy[1] - 0.04, z, 0.0],
                [cxy[0] - 0.05, cxy[1] + 0.04, z, 0.0],
                [cxy[0] + 0.05, cxy[1] + 0.04, z, 0.0],
            ]
            if cid == "wipe_avoid" and kind == "fail":
                a0 = start_pose(b, p["avoid"])
                zig.append([a0[0], a0[1], z, 0.0])  # swipes through the plate
            elif cid == "wipe_on" and kind == "fail":
                zig = [zig[0], zig[1]]  # one straight swipe, no turning
            b.move_object(tool, [slide(t0, dz=0.1), [zig[0][0], zig[0][1], z + 0.1, 0.0]] + zig)
            out[kind] = b
    elif cid == "shake":
        t = p["target"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            up = slide(p0, dz=0.06)
            if kind == "pass":
                b.move_object(t, [p0, up, slide(p0, dz=0.01), up,
                                  slide(p0, dz=0.01), p0])
            else:
                b.move_object(t, [p0, up, p0])  # a single bounce
            out[kind] = b
    elif cid == "stir":
        tool, vessel = p["tool"], p["vessel"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            t0 = start_pose(b, tool)
            v0 = start_pose(b, vessel)
            vh = b.dims[vessel][2]
            th = b.dims[tool][2]
            z_in = v0[2] + vh / 2 - 0.02 + th / 2  # bottom dips below the top
            entry = [v0[0], v0[1], z_in, 0.0]
            b.move_object(tool, [slide(t0, dz=0.15),
                                 [v0[0], v0[1], z_in + 0.15, 0.0], entry], per_leg=8)
            if kind == "pass":
                for k in range(49):
                    ang = 4 * math.pi * k / 48
                    b.emit({tool: [v0[0] + 0.01 * math.cos(ang),
                                   v0[1] + 0.01 * math.sin(ang), z_in, 0.0]})
            else:
                b.move_object(tool, [entry, [v0[0] + 0.012, v0[1], z_in, 0.0]],
                              per_leg=6)
            out[kind] = b
    elif cid == "star":
        tool = p["tool"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            t0 = start_pose(b, tool)
            th = b.dims[tool][2]
            z = th / 2 + 0.004  # tip 4 mm above the table: in the contact band
            cx, cy, radius = 0.1, 0.4, p["width"] / 2
            if kind == "pass":
                order = [0, 2, 4, 1, 3, 0]  # pentagram stroke
                keypoints = [
                    [cx + radius * math.cos(math.pi / 2 + k * 2 * math.pi / 5),
                     cy + radius * math.sin(math.pi / 2 + k * 2 * math.pi / 5), z, 0.0]
                    for k in order
                ]
            else:  # a small square: every star vertex stays out of tolerance
                r = radius / 2
                keypoints = [[cx + dx, cy + dy, z, 0.0]
                             for dx, dy in [(-r, -r), (r, -r), (r, r), (-r, r),
                                            (-r, -r)]]
            b.move_object(tool, [slide(t0, dz=0.1),
                                 [keypoints[0][0], keypoints[0][1], z + 0.1, 0.0]]
                          + keypoints, per_leg=20)
            out[kind] = b
    elif cid == "align_axis":
        t = p["target"]
        for kind, yaw in (("pass", 0.05), ("fail", 1.2)):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            b.move_object(t, [p0, slide(p0, dz=0.1),
                              [p0[0], p0[1], p0[2] + 0.1, yaw],
                              [p0[0], p0[1], p0[2], yaw]])
            out[kind] = b
    elif cid == "rotate_lifted":
        t = p["target"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            if kind == "pass":
                b.move_object(t, [p0, [p0[0], p0[1], p0[2], 1.8],
                                  [p0[0], p0[1], p0[2] + 0.1, 1.8]])
            else:  # lifts first, rotates later: not an unscrewing motion
                b.move_object(t, [p0, slide(p0, dz=0.05),
                                  [p0[0], p0[1], p0[2] + 0.05, 1.8]])
            out[kind] = b
    elif cid == "rotate_signed":
        t = p["target"]
        for kind, yaw in (("pass", 0.6), ("fail", -0.6)):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            b.move_object(t, [p0, [p0[0], p0[1], p0[2], yaw]])
            out[kind] = b
    elif cid == "circle":
        cx, cy = p["center"]
        for kind, radius in (("pass", p["radius"]), ("fail", 0.08)):
            b = LogBuilder(scene)
            b.emit()
            b.emit(gripper=(cx + radius, cy, 0.2, 0.0), gripper_open=True)
            b.emit(gripper=(cx + radius, cy, 0.2, 0.0), gripper_open=False)
            for k in range(73):
                ang = 2 * math.pi * k / 72
                b.emit(gripper=(cx + radius * math.cos(ang),
                                cy + radius * math.sin(ang), 0.005, 0.0),
                       gripper_open=False)
            out[kind] = b
    elif cid == "removed_from":
        t = p["target"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            th = b.dims[t][2]
            if kind == "pass":
                b.move_object(t, [p0, slide(p0, dz=0.2),
                                  [0.35, 0.25, 0.2 + p0[2], p0[3]],
                                  [0.35, 0.25, th / 2, p0[3]]])
            else:
                b.move_object(t, [p0, slide(p0, dz=0.01), p0])
            out[kind] = b
    elif cid == "rest_on":
        t, s = p["target"], p["support"]
        for kind in ("pass", "fail"):
            b = LogBuilder(scene)
            b.emit()
            p0 = start_pose(b, t)
            s0 = start_pose(b, s)
            sh = b.dims[s][2]
            th = b.dims[t][2]
            if kind == "pass":
                goal = [s0[0], s0[1], s0[2] + sh / 2 + th / 2, p0[3]]
            else:  # dropped beside the rack, on the table
                goal = [s0[0] - 0.15, s0[1], th / 2, p0[3]]
            b.move_object(t, [p0, slide(p0, dz=0.25),
                              [goal[0], goal[1], p0[2] + 0.25, p0[3]], goal])
            out[kind] = b
    else:
        raise ValueError(f"no calibration recipe for checker {cid!r}")
    return out


def main():
    tasks = load_all_tasks()
    for task_id, scene in tasks.items():
        logs = build_task_logs(task_id, scene)
        assert set(logs) == {"pass", "fail"}, task_id
        for kind, builder in logs.items():
            builder.write(OUT / task_id / f"{kind}.jsonl")
    print(f"wrote calibration pairs for {len(tasks)} tasks to {OUT}")


if __name__ == "__main__":
    main()
