#!/usr/bin/env python3
"""Records the golden episode fixtures under tests/fixtures/goldens/: for
each fixture a chat transcript, the program executions' api calls (code mode),
the episode log bytes, and the expected outcomes. Re-run after changing the
pipeline; the replay tests then compare against these bytes."""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from trajbench.catalog import load_task  # noqa: E402
from trajbench.chat import RecordingBackend, ScriptedBackend  # noqa: E402
from trajbench.gateway import InProcessRunner, RecordingRunner  # noqa: E402
from trajbench.orchestrator import run_episode  # noqa: E402
from trajbench.prompts import PromptConfig  # noqa: E402
from trajbench.simulator import Simulator  # noqa: E402

OUT = ROOT / "tests" / "fixtures" / "goldens"

VERDICT_TRUE = ("The recorded motion matches the request.\n"
                "TASK COMPLETED: TRUE")
VERDICT_FALSE = ("The target does not show the required motion.\n"
                 "TASK COMPLETED: FALSE")


def code_reply(body: str) -> str:
    return f"Plan: carry out the motion step by step.\n```python\n{body}\n```"


def scene_poses(task_id: str, seed: int = 0):
    sim = Simulator(load_task(task_id))
    state = sim.reset(seed)
    return {name: obj.pose for name, obj in state.objects.items()}


PICK_CODE = """\
box = detect_object("left chip bag")
x, y, z = box["position"]
yaw = box["orientation"]
execute_trajectory([[x, y, 0.3, yaw], [x, y, z, yaw]])
close_gripper()
execute_trajectory([[x, y, z, yaw], [x, y, z + 0.2, yaw]])
task_completed()
"""

PLACE_CODE = """\
apple = detect_object("apple")
bowl = detect_object("bowl")
ax, ay, az = apple["position"]
ayaw = apple["orientation"]
bx, by, bz = bowl["position"]
drop_z = bz + bowl["dimensions"][2] / 2 + 0.08
execute_trajectory([[ax, ay, 0.3, ayaw], [ax, ay, az, ayaw]])
close_gripper()
execute_trajectory([[ax, ay, az, ayaw], [ax, ay, 0.3, ayaw],
                    [bx, by, 0.3, ayaw], [bx, by, drop_z, ayaw]])
open_gripper()
execute_trajectory([[bx, by, drop_z, ayaw], [bx, by, 0.35, ayaw]])
task_completed()
"""

BOWL_CENTROID_CODE = """\
bowl = detect_object("bowl")
x, y, z = bowl["position"]
execute_trajectory([[x, y, 0.3, 0.0], [x, y, z, 0.0]])
close_gripper()
execute_trajectory([[x, y, z, 0.0], [x, y, z + 0.2, 0.0]])
task_completed()
"""

BOWL_OFF_RIM_CODE = """\
rim = detect_object("rim of the bowl")
x, y, z = rim["position"]
execute_trajectory([[x + 0.05, y, 0.3, 0.0], [x + 0.05, y, z, 0.0]])
close_gripper()
execute_trajectory([[x + 0.05, y, z, 0.0], [x + 0.05, y, z + 0.2, 0.0]])
task_completed()
"""

BOWL_RIM_CODE = """\
rim = detect_object("rim of the bowl")
x, y, z = rim["position"]
yaw = rim["orientation"]
execute_trajectory([[x, y, 0.3, yaw], [x, y, z, yaw]])
close_gripper()
execute_trajectory([[x, y, z, yaw], [x, y, z + 0.2, yaw]])
task_completed()
"""

SUMMARY_CENTROID = (
    "The bowl never moved: the fingers closed on its wide body at the "
    "centroid, which exceeds the gripper stroke, so nothing was grasped. "
    "Next time grasp the thin rim at the bowl's edge instead."
)
SUMMARY_OFF_RIM = (
    "The bowl still never moved: the fingers closed next to the rim rather "
    "than on it. Next time place the fingers exactly at the detected rim "
    "position before closing."
)


def row(x, y, z, yaw=0.0):
    return f"[{x!r}, {y!r}, {z!r}, {yaw!r}]"


def push_numeric(task_id, seed):
    can = scene_poses(task_id, seed)["can"]
    rows = [
        row(can.x - 0.08, can.y, 0.25),
        row(can.x - 0.08, can.y, 0.02),
        row(can.x + 0.12, can.y, 0.02),
        row(can.x + 0.12, can.y, 0.25),
    ]
    return ("The motion is a straight horizontal sweep through the can.\n"
            f"<trajectory>[{', '.join(rows)}]</trajectory>")


def shake_numeric(task_id, seed):
    bottle = scene_poses(task_id, seed)["mustard bottle"]
    x, y, z = bottle.x, bottle.y, bottle.z
    rows = [row(x, y, 0.3), row(x, y, z), "close_gripper"]
    for _ in range(3):
        rows.append(row(x, y, z + 0.08))
        rows.append(row(x, y, z + 0.01))
    return ("The motion is a vertical sinusoidal shake after grasping.\n"
            f"<trajectory>[{', '.join(rows)}]</trajectory>")


def circle_numeric(task_id, seed):
    import math

    rows = ["close_gripper", row(0.05, 0.3, 0.05), row(0.05, 0.3, 0.005)]
    for k in range(1, 73):
        ang = 2 * math.pi * k / 72
        rows.append(row(0.05 * math.cos(ang), 0.3 + 0.05 * math.sin(ang), 0.005))
    rows.append(row(0.05, 0.3, 0.2))
    return ("The motion is a full circle of radius 0.05 m around (0.0, 0.3), "
            "traced at the table with the gripper closed.\n"
            f"<trajectory>[{', '.join(rows)}]</trajectory>")


FIXTURES = [
    {
        "name": "pick",
        "task_id": "pick_chip_bag_left",
        "output_mode": "code",
        "replies": lambda tid, seed: [code_reply(PICK_CODE), VERDICT_TRUE],
    },
    {
        "name": "place_in_bowl",
        "task_id": "place_apple_in_bowl",
        "output_mode": "code",
        "replies": lambda tid, seed: [code_reply(PLACE_CODE), VERDICT_TRUE],
    },
    {
        "name": "push",
        "task_id": "push_can_right",
        "output_mode": "numeric",
        "replies": lambda tid, seed: [push_numeric(tid, seed), VERDICT_TRUE],
    },
    {
        "name": "shake",
        "task_id": "shake_mustard_bottle",
        "output_mode": "numeric",
        "replies": lambda tid, seed: [shake_numeric(tid, seed), VERDICT_TRUE],
    },
    {
        "name": "circle",
        "task_id": "draw_circle",
        "output_mode": "numeric",
        "replies": lambda tid, seed: [circle_numeric(tid, seed), VERDICT_TRUE],
    },
    {
        "name": "bowl_replan",
        "task_id": "pick_up_bowl",
        "output_mode": "code",
        "replies": lambda tid, seed: [
            code_reply(BOWL_CENTROID_CODE), VERDICT_FALSE, SUMMARY_CENTROID,
            code_reply(BOWL_OFF_RIM_CODE), VERDICT_FALSE, SUMMARY_OFF_RIM,
            code_reply(BOWL_RIM_CODE), VERDICT_TRUE,
        ],
    },
]

SEED = 0


def record(fixture):
    task = load_task(fixture["task_id"])
    cfg = PromptConfig(output_mode=fixture["output_mode"])
    scripted = ScriptedBackend(fixture["replies"](fixture["task_id"], SEED))
    backend = RecordingBackend(scripted, model="scripted",
                               task_id=fixture["task_id"])
    runner = RecordingRunner(InProcessRunner()) if fixture["output_mode"] == "code" else None
    result = run_episode(task, SEED, cfg, backend, runner=runner)

    out = OUT / fixture["name"]
    out.mkdir(parents=True, exist_ok=True)
    backend.save(out / "transcript.json")
    if runner is not None:
        with open(out / "api_calls.json", "w", encoding="utf-8") as fh:
            json.dump({"executions": runner.executions}, fh, indent=1)
            fh.write("\n")
    with open(out / "episode.jsonl", "wb") as fh:
        fh.write(result.log_bytes())
    meta = {
        "task_id": fixture["task_id"],
        "seed": SEED,
        "output_mode": fixture["output_mode"],
        "expected": {
            "task_completed": result.task_completed,
            "checker_verdict": result.checker_verdict,
            "replans_used": result.replans_used,
            "llm_queries": result.llm_queries,
            "attempt_checker_verdicts": [a.checker_verdict for a in result.attempts],
        },
    }
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")
    return result


def main():
    failures = []
    for fixture in FIXTURES:
        result = record(fixture)
        ok = result.task_completed and result.checker_verdict
        print(f"{fixture['name']:14s} attempts={len(result.attempts)} "
              f"llm={result.task_completed} checker={result.checker_verdict} "
              f"queries={result.llm_queries}")
        if not ok:
            failures.append(fixture["name"])
    if failures:
        raise SystemExit(f"fixtures not passing their checkers: {failures}")


if __name__ == "__main__":
    main()
