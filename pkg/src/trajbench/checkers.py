"""Ground-truth success checkers: pure geometric predicates over episode
logs. Every threshold is fixed here or in the task's checker parameters;
verdicts depend only on the log's bytes.

A checker evaluates the FINAL attempt of an episode (the segment after the
last attempt-boundary record), since re-planning resets the scene.
"""

from __future__ import annotations

import json
import math

from .simulator import WORKSPACE

TABLE_CONTACT_BAND = 0.005  # "on the table" = bottom face within 5 mm of z=0


class CheckerError(Exception):
    pass


class UnknownTask(CheckerError):
    pass


# ── Episode log access ───────────────────────────────────────────────────

def parse_episode_log(log) -> list[dict]:
    """Accepts raw jsonl text/bytes, a list of lines, or parsed records."""
    if isinstance(log, bytes):
        log = log.decode("utf-8")
    if isinstance(log, str):
        lines = log.splitlines()
    elif log and isinstance(log[0], dict):
        return list(log)
    else:
        lines = log
    return [json.loads(line) for line in lines if line.strip()]


def final_attempt_ticks(records: list[dict]) -> list[dict]:
    last_boundary = 0
    for i, rec in enumerate(records):
        if rec.get("type") == "attempt":
            last_boundary = i
    ticks = [r for r in records[last_boundary:] if r.get("type") == "tick"]
    if not ticks:
        raise CheckerError("episode log has no tick records in the final attempt")
    return ticks


def _obj(rec: dict, name: str) -> dict:
    try:
        return rec["objects"][name]
    except KeyError:
        raise CheckerError(f"object {name!r} missing from a tick record") from None


def _center(o: dict) -> tuple[float, float, float]:
    return tuple(o["position"])


def _bottom(o: dict) -> float:
    return o["position"][2] - o["dimensions"][2] / 2.0


def _top(o: dict) -> float:
    return o["position"][2] + o["dimensions"][2] / 2.0


def _rect(o: dict):
    return (o["position"][0], o["position"][1], o["orientation"],
            o["dimensions"][0] / 2.0, o["dimensions"][1] / 2.0)


def _xy_dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _point_in_rect(px, py, rect) -> bool:
    cx, cy, yaw, hw, hl = rect
    c, s = math.cos(yaw), math.sin(yaw)
    dx, dy = px - cx, py - cy
    return abs(c * dx + s * dy) <= hw and abs(-s * dx + c * dy) <= hl


def _rect_gap(a, b) -> float:
    """Max separation over SAT axes: > 0 means disjoint, <= 0 overlapping."""
    def axes(yaw):
        c, s = math.cos(yaw), math.sin(yaw)
        return [(c, s), (-s, c)]

    def corners(r):
        cx, cy, yaw, hw, hl = r
        ax, ay = axes(yaw)
        return [(cx + sx * hw * ax[0] + sy * hl * ay[0],
                 cy + sx * hw * ax[1] + sy * hl * ay[1])
                for sx in (1, -1) for sy in (1, -1)]

    ca, cb = corners(a), corners(b)
    gap = -math.inf
    for axis in axes(a[2]) + axes(b[2]):
        pa = [p[0] * axis[0] + p[1] * axis[1] for p in ca]
        pb = [p[0] * axis[0] + p[1] * axis[1] for p in cb]
        gap = max(gap, max(min(pb) - max(pa), min(pa) - max(pb)))
    return gap


def _boxes_touch(a: dict, b: dict, slack: float = 0.003) -> bool:
    z_gap = max(_bottom(a) - _top(b), _bottom(b) - _top(a))
    return _rect_gap(_rect(a), _rect(b)) <= slack and z_gap <= slack


def _path_length(points) -> float:
    return sum(_xy_dist(a, b) for a, b in zip(points, points[1:]))


def _total_turn(points, min_move: float = 1e-6) -> float:
    headings = []
    for a, b in zip(points, points[1:]):
        if _xy_dist(a, b) > min_move:
            headings.append(math.atan2(b[1] - a[1], b[0] - a[0]))
    turn = 0.0
    for h0, h1 in zip(headings, headings[1:]):
        d = math.fmod(h1 - h0 + 3 * math.pi, 2 * math.pi) - math.pi
        turn += abs(d)
    return turn


def _unwrap(angles):
    out = [angles[0]]
    for a in angles[1:]:
        d = math.fmod(a - out[-1] + 3 * math.pi, 2 * math.pi) - math.pi
        out.append(out[-1] + d)
    return out


def _count_reversals(values, amplitude: float) -> int:
    extreme = values[0]
    direction = 0
    reversals = 0
    for v in values:
        if direction == 0:
            if abs(v - extreme) >= amplitude:
                direction = 1 if v > extreme else -1
                extreme = v
        elif direction > 0:
            if v > extreme:
                extreme = v
            elif extreme - v >= amplitude:
                reversals += 1
                direction = -1
                extreme = v
        else:
            if v < extreme:
                extreme = v
            elif v - extreme >= amplitude:
                reversals += 1
                direction = 1
                extreme = v
    return reversals


def _on_table_throughout(ticks, name, band) -> bool:
    return all(abs(_bottom(_obj(t, name))) <= band for t in ticks)


# ── Checker predicates ───────────────────────────────────────────────────

def check_lift(ticks, p) -> bool:
    zs = [_obj(t, p["target"])["position"][2] for t in ticks]
    return max(zs) - zs[0] >= p.get("height", 0.10)


def check_proximity(ticks, p) -> bool:
    a = _center(_obj(ticks[-1], p["target"]))
    b = _center(_obj(ticks[-1], p["reference"]))
    return _xy_dist(a, b) <= p.get("distance", 0.05)


def check_push_any(ticks, p) -> bool:
    first = _center(_obj(ticks[0], p["target"]))
    last = _center(_obj(ticks[-1], p["target"]))
    band = p.get("surface_band", TABLE_CONTACT_BAND)
    return (_xy_dist(first, last) >= p["distance"]
            and _on_table_throughout(ticks, p["target"], band))


def check_push_direction(ticks, p) -> bool:
    axis = 0 if p.get("axis", "x") == "x" else 1
    first = _center(_obj(ticks[0], p["target"]))
    last = _center(_obj(ticks[-1], p["target"]))
    moved = (last[axis] - first[axis]) * p.get("sign", 1)
    band = p.get("surface_band", TABLE_CONTACT_BAND)
    return moved >= p["distance"] and _on_table_throughout(ticks, p["target"], band)


def check_push_to(ticks, p) -> bool:
    band = p.get("surface_band", TABLE_CONTACT_BAND)
    return (check_proximity(ticks, p)
            and _on_table_throughout(ticks, p["target"], band))


def check_move_direction(ticks, p) -> bool:
    axis = 0 if p.get("axis", "x") == "x" else 1
    first = _center(_obj(ticks[0], p["target"]))
    last = _center(_obj(ticks[-1], p["target"]))
    return (last[axis] - first[axis]) * p.get("sign", 1) >= p["distance"]


def check_near_edge(ticks, p) -> bool:
    y = _center(_obj(ticks[-1], p["target"]))[1]
    return y <= WORKSPACE["y"][0] + p.get("distance", 0.10)


def check_lonely_join(ticks, p) -> bool:
    names = sorted(ticks[0]["objects"])
    if len(names) < 2:
        raise CheckerError("lonely_join needs at least two objects")

    def min_dist(rec, name):
        c = _center(_obj(rec, name))
        return min(_xy_dist(c, _center(_obj(rec, other)))
                   for other in names if other != name)

    lonely = max(names, key=lambda n: min_dist(ticks[0], n))
    return min_dist(ticks[-1], lonely) <= p.get("distance", 0.05)


def check_touch(ticks, p) -> bool:
    return any(_boxes_touch(_obj(t, p["target"]), _obj(t, p["reference"]))
               for t in ticks)


def check_containment(ticks, p) -> bool:
    target = _obj(ticks[-1], p["target"])
    container = _obj(ticks[-1], p["container"])
    cx, cy, _ = _center(target)
    return (_point_in_rect(cx, cy, _rect(container))
            and target["position"][2] < _top(container))


def check_removed_to_table(ticks, p) -> bool:
    target = _obj(ticks[-1], p["target"])
    container = _obj(ticks[-1], p["container"])
    cx, cy, _ = _center(target)
    return (not _point_in_rect(cx, cy, _rect(container))
            and abs(_bottom(target)) <= TABLE_CONTACT_BAND)


def _wipe_window(ticks, tool, surface=None, band=0.01):
    """Ticks where the tool's bottom face rides on the surface (or table)."""
    window = []
    for t in ticks:
        o = _obj(t, tool)
        if surface is None:
            in_contact = abs(_bottom(o)) <= band
        else:
            s = _obj(t, surface)
            cx, cy, _ = _center(o)
            in_contact = (abs(_bottom(o) - _top(s)) <= band
                          and _point_in_rect(cx, cy, _rect(s)))
        if in_contact:
            window.append(_center(o))
    return window


def check_wipe_on(ticks, p) -> bool:
    pts = _wipe_window(ticks, p["tool"], p["surface"], p.get("band", 0.01))
    return (_path_length(pts) >= p.get("min_path", 0.15)
            and _total_turn(pts) >= p.get("min_turn", math.pi))


def check_wipe_avoid(ticks, p) -> bool:
    pts = _wipe_window(ticks, p["tool"], None, p.get("band", 0.01))
    if any(_boxes_touch(_obj(t, p["tool"]), _obj(t, p["avoid"])) for t in ticks):
        return False
    return (_path_length(pts) >= p.get("min_path", 0.15)
            and _total_turn(pts) >= p.get("min_turn", math.pi))


def check_shake(ticks, p) -> bool:
    amp = p.get("amplitude", 0.03)
    need = p.get("reversals", 2)
    series = [_center(_obj(t, p["target"])) for t in ticks]
    zs = [c[2] for c in series]
    xs = [c[0] for c in series]
    return (_count_reversals(zs, amp) >= need
            or _count_reversals(xs, amp) >= need)


def check_stir(ticks, p) -> bool:
    pts = []
    for t in ticks:
        tool = _obj(t, p["tool"])
        vessel = _obj(t, p["vessel"])
        cx, cy, _ = _center(tool)
        if _bottom(tool) < _top(vessel) and _point_in_rect(cx, cy, _rect(vessel)):
            pts.append(_center(tool))
    return (_path_length(pts) >= p.get("min_path", 0.04)
            and _total_turn(pts) >= p.get("min_turn", 4.71))


def check_star(ticks, p) -> bool:
    band = p.get("contact_band", 0.01)
    tol = p.get("tolerance", 0.015)
    radius = p.get("width", 0.10) / 2.0
    pts = [_center(_obj(t, p["tool"])) for t in ticks
           if _bottom(_obj(t, p["tool"])) <= band]
    if len(pts) < 5:
        return False
    cx = sum(q[0] for q in pts) / len(pts)
    cy = sum(q[1] for q in pts) / len(pts)
    best = math.inf
    step = math.radians(0.5)
    for k in range(int(math.radians(72.0) / step)):
        theta = k * step
        worst = 0.0
        for v in range(5):
            ang = theta + v * 2 * math.pi / 5
            vx, vy = cx + radius * math.cos(ang), cy + radius * math.sin(ang)
            nearest = min(math.hypot(q[0] - vx, q[1] - vy) for q in pts)
            worst = max(worst, nearest)
            if worst > best:
                break
        best = min(best, worst)
    return best <= tol


def check_align_axis(ticks, p) -> bool:
    o = _obj(ticks[-1], p["target"])
    w, l = o["dimensions"][0], o["dimensions"][1]
    if abs(w - l) < 1e-9:
        raise CheckerError("align_axis target has no long axis")
    long_axis = o["orientation"] + (math.pi / 2.0 if l >= w else 0.0)
    off = math.fmod(long_axis - math.pi / 2.0, math.pi)
    if off > math.pi / 2.0:
        off -= math.pi
    elif off <= -math.pi / 2.0:
        off += math.pi
    return abs(off) <= p.get("tolerance", 0.26)


def check_rotate_lifted(ticks, p) -> bool:
    yaws = _unwrap([_obj(t, p["target"])["orientation"] for t in ticks])
    zs = [_obj(t, p["target"])["position"][2] for t in ticks]
    need = p.get("min_rotation", math.pi / 2.0)
    max_lift = p.get("max_lift", 0.01)
    for i, yaw in enumerate(yaws):
        if abs(yaw - yaws[0]) >= need:
            return all(z - zs[0] <= max_lift for z in zs[:i + 1])
    return False


def check_rotate_signed(ticks, p) -> bool:
    yaws = _unwrap([_obj(t, p["target"])["orientation"] for t in ticks])
    return yaws[-1] - yaws[0] >= p.get("min_rotation", 0.4)


def check_circle(ticks, p) -> bool:
    cx, cy = p["center"]
    radius = p["radius"]
    window = []
    for t in ticks:
        gx, gy, gz, _ = t["gripper"]
        if not t["gripper_open"] and gz <= p.get("max_z", 0.01):
            window.append((gx, gy))
    if len(window) < 2:
        return False
    for x, y in window:
        if abs(math.hypot(x - cx, y - cy) - radius) > p.get("residual", 0.015):
            return False
    angles = _unwrap([math.atan2(y - cy, x - cx) for x, y in window])
    sweep = sum(abs(b - a) for a, b in zip(angles, angles[1:]))
    return sweep >= p.get("min_sweep", 5.65)


def check_removed_from(ticks, p) -> bool:
    target = _obj(ticks[-1], p["target"])
    container = _obj(ticks[-1], p["container"])
    return (_rect_gap(_rect(target), _rect(container)) > 0
            or _bottom(target) >= _top(container))


def check_rest_on(ticks, p) -> bool:
    target = _obj(ticks[-1], p["target"])
    support = _obj(ticks[-1], p["support"])
    cx, cy, _ = _center(target)
    return (abs(_bottom(target) - _top(support)) <= p.get("tolerance", 0.01)
            and _point_in_rect(cx, cy, _rect(support))
            and _bottom(target) >= p.get("min_height", 0.05))


CHECKERS = {
    "lift": check_lift,
    "proximity": check_proximity,
    "push_any": check_push_any,
    "push_direction": check_push_direction,
    "push_to": check_push_to,
    "move_direction": check_move_direction,
    "near_edge": check_near_edge,
    "lonely_join": check_lonely_join,
    "touch": check_touch,
    "containment": check_containment,
    "removed_to_table": check_removed_to_table,
    "wipe_on": check_wipe_on,
    "wipe_avoid": check_wipe_avoid,
    "shake": check_shake,
    "stir": check_stir,
    "star": check_star,
    "align_axis": check_align_axis,
    "rotate_lifted": check_rotate_lifted,
    "rotate_signed": check_rotate_signed,
    "circle": check_circle,
    "removed_from": check_removed_from,
    "rest_on": check_rest_on,
}


def run_checker(checker: dict, log) -> bool:
    """Evaluate a checker spec {"id": ..., "params": {...}} over a log."""
    try:
        fn = CHECKERS[checker["id"]]
    except KeyError:
        raise CheckerError(f"unknown checker id {checker['id']!r}") from None
    records = parse_episode_log(log)
    return bool(fn(final_attempt_ticks(records), checker.get("params", {})))


def check_success(task_id: str, log) -> bool:
    """Ground-truth verdict for an episode of the named catalog task."""
    from .catalog import load_task

    try:
        scene = load_task(task_id)
    except KeyError:
        raise UnknownTask(f"no task named {task_id!r}") from None
    return run_checker(scene.checker, log)
