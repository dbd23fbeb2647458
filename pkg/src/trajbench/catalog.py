"""Task catalog loading: one JSON document per task under tasks/."""

from __future__ import annotations

import json
from importlib import resources

from .geometry import Pose
from .simulator import Cavity, Part, SceneObject, TaskScene

# Subset used for the one-flag-at-a-time prompt ablations.
ABLATION_TASK_IDS = (
    "pick_chip_bag_right_of_can",
    "place_apple_in_bowl",
    "shake_mustard_bottle",
    "open_bottle_cap",
    "move_pan_left",
)

# Spatial or color qualifiers in object names; not task-specific nouns.
_QUALIFIERS = {
    "left", "right", "middle", "leftmost", "rightmost", "lonely",
    "red", "green", "blue", "yellow", "of", "the",
}


def _tasks_dir():
    return resources.files("trajbench") / "tasks"


def _parse_object(doc: dict) -> SceneObject:
    parts = {
        name: Part(tuple(p["offset"]), tuple(p["dimensions"]), p.get("yaw", 0.0))
        for name, p in doc.get("parts", {}).items()
    }
    cavities = [
        Cavity(tuple(c["offset"]), tuple(c["dimensions"]), c["floor"])
        for c in doc.get("cavities", [])
    ]
    return SceneObject(
        name=doc["name"],
        shape=doc["shape"],
        dimensions=tuple(doc["dimensions"]),
        pose=Pose(*doc["pose"]),
        graspable=doc.get("graspable", False),
        movable=doc.get("movable", True),
        parts=parts,
        cavities=cavities,
        anchor=doc.get("anchor"),
    )


def _parse_task(doc: dict) -> TaskScene:
    return TaskScene(
        task_id=doc["id"],
        instruction=doc["instruction"],
        objects=[_parse_object(o) for o in doc["objects"]],
        randomization=doc.get("randomization", {}),
        checker=doc["checker"],
        criterion=doc.get("criterion", ""),
        proxy_notes=doc.get("proxy_notes", ""),
    )


def task_ids() -> list[str]:
    return sorted(
        p.name[:-len(".json")]
        for p in _tasks_dir().iterdir()
        if p.name.endswith(".json")
    )


def load_task(task_id: str) -> TaskScene:
    path = _tasks_dir() / f"{task_id}.json"
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise KeyError(f"no task named {task_id!r}") from None
    return _parse_task(doc)


def load_all_tasks() -> dict[str, TaskScene]:
    return {tid: load_task(tid) for tid in task_ids()}


def object_vocabulary() -> set[str]:
    """Noun tokens from every object and part name in the catalog; the main
    prompt must contain none of them."""
    words: set[str] = set()
    for scene in load_all_tasks().values():
        for obj in scene.objects:
            words.update(obj.name.lower().split())
            for part_name in obj.parts:
                words.update(part_name.lower().split())
    return words - _QUALIFIERS
