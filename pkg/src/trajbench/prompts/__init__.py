"""Main-prompt assembly with per-component ablation flags, plus the success
detection and re-planning prompt machinery.

The main prompt is task-agnostic: it never mentions anything from any scene.
Every component lives in its own file under prompts/ and is wrapped in a
stable delimiter comment so ablations are byte-diffable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace
from importlib import resources

from ..chat import ChatMessage
from ..simulator import ObjectTracks, _downsample_indices

SUMMARY_WORD_CAP = 150

VERDICT_TRUE = "TASK COMPLETED: TRUE"
VERDICT_FALSE = "TASK COMPLETED: FALSE"

FALLBACK_SUMMARY = "previous attempt failed"

# Ablation flags, in prompt order. Each maps to prompts/<name>.txt.
ABLATION_FLAGS = (
    "step_by_step_plan",
    "gripper_contact_step",
    "function_documentation",
    "reusable_functions",
    "numbered_step_variables",
    "collision_avoidance",
    "clear_objects_phrase",
    "trajectory_shape_description",
    "object_part_description",
)


class ConfigError(Exception):
    pass


class VerdictUnparseable(Exception):
    pass


@dataclass(frozen=True)
class PromptConfig:
    step_by_step_plan: bool = True
    gripper_contact_step: bool = True
    function_documentation: bool = True
    reusable_functions: bool = True
    numbered_step_variables: bool = True
    collision_avoidance: bool = True
    clear_objects_phrase: bool = True
    trajectory_shape_description: bool = True
    object_part_description: bool = True
    output_mode: str = "code"  # "code" | "numeric"
    gripper_mode: str = "explicit"  # "explicit" | "binary"
    as_system_message: bool = False  # place the main prompt in a system turn

    def validate(self):
        if self.output_mode not in ("code", "numeric"):
            raise ConfigError(f"unknown output mode {self.output_mode!r}")
        if self.gripper_mode not in ("explicit", "binary"):
            raise ConfigError(f"unknown gripper mode {self.gripper_mode!r}")
        if self.clear_objects_phrase and not self.collision_avoidance:
            raise ConfigError(
                "clear_objects_phrase requires collision_avoidance"
            )
        if self.gripper_mode == "binary" and self.output_mode == "code":
            raise ConfigError(
                "binary gripper rows exist only in numeric output mode; the "
                "code-mode trajectory rows are fixed at 4 elements"
            )

    def with_flag_off(self, name: str) -> "PromptConfig":
        if name not in ABLATION_FLAGS:
            raise ConfigError(f"unknown ablation flag {name!r}")
        off = {name: False}
        if name == "collision_avoidance":
            # the phrase lives inside the collision section and goes with it
            off["clear_objects_phrase"] = False
        return replace(self, **off)

    def flags(self) -> dict[str, bool]:
        return {f: getattr(self, f) for f in ABLATION_FLAGS}

    def variant_name(self) -> str:
        off = [f for f in ABLATION_FLAGS if not getattr(self, f)]
        return "full" if not off else "no_" + "+".join(off)

    def differing_flags(self, other: "PromptConfig") -> list[str]:
        return [
            f.name for f in fields(self)
            if getattr(self, f.name) != getattr(other, f.name)
        ]


def _load_component(name: str) -> str:
    path = resources.files("trajbench.prompts") / f"{name}.txt"
    return path.read_text(encoding="utf-8").strip()


def _section(name: str) -> str:
    return f"<!-- section: {name} -->\n{_load_component(name)}\n\n"


def build_main_prompt(cfg: PromptConfig) -> str:
    """Deterministic concatenation of the base sections and exactly the
    enabled components; contains nothing scene-specific."""
    cfg.validate()
    if cfg.output_mode == "code":
        output_section = "output_code"
    else:
        output_section = f"output_numeric_{cfg.gripper_mode}"
    parts = [
        _section("frame"),
        _section("workspace"),
        _section("api"),
        _section(output_section),
    ]
    for flag in ABLATION_FLAGS:
        if flag == "clear_objects_phrase" or not getattr(cfg, flag):
            continue
        if flag == "collision_avoidance" and cfg.clear_objects_phrase:
            # the phrase is a delimited sub-section nested in the collision
            # section, so removing either flag deletes one contiguous block
            body = (
                _load_component("collision_avoidance")
                + "\n<!-- section: clear_objects_phrase -->\n"
                + _load_component("clear_objects_phrase")
            )
            parts.append(f"<!-- section: collision_avoidance -->\n{body}\n\n")
        else:
            parts.append(_section(flag))
    return "".join(parts)


@dataclass
class PromptBundle:
    """The assembled per-attempt prompt: main prompt, instruction, and (after
    a failed attempt) the model's failure summary."""

    main_prompt: str
    instruction: str
    summary: str | None = None

    def text(self) -> str:
        return compose_task_prompt(self.main_prompt, self.instruction, self.summary)

    def messages(self, as_system: bool = False) -> list[ChatMessage]:
        if not as_system:
            return [ChatMessage("user", self.text())]
        rest = compose_task_prompt("", self.instruction, self.summary)
        return [ChatMessage("system", self.main_prompt), ChatMessage("user", rest)]


def compose_task_prompt(main_prompt: str, instruction: str,
                        summary: str | None = None) -> str:
    parts = [main_prompt,
             f"<!-- section: instruction -->\nTask: {instruction}\n"]
    if summary is not None:
        parts.append(
            "\n<!-- section: previous_attempt -->\n"
            "A previous attempt at this task failed. Summary of what went "
            f"wrong, to take into account this time:\n{summary}\n"
        )
    return "".join(parts)


# ── Success detection ────────────────────────────────────────────────────

def _render_series(lines: list[str], label: str) -> str:
    return f"{label}:\n" + "\n".join(lines) + "\n"


def build_success_prompt(instruction: str, tracks: ObjectTracks) -> str:
    """Render the recorded tracks as fixed-precision numbers and ask for a
    verdict in the exact contract format."""
    if not tracks.objects and not tracks.gripper:
        raise ValueError("tracks must be non-empty")
    blocks = []
    for name in sorted(tracks.objects):
        lines = []
        for tick, box in tracks.objects[name]:
            p = box.position
            d = box.dimensions
            lines.append(
                f"  tick {tick}: position [{p[0]:.4f}, {p[1]:.4f}, {p[2]:.4f}], "
                f"yaw {box.yaw:.4f}, dimensions [{d[0]:.4f}, {d[1]:.4f}, {d[2]:.4f}]"
            )
        blocks.append(_render_series(lines, f"object: {name}"))
    if tracks.gripper:
        idx = _downsample_indices(len(tracks.gripper), 20)
        lines = []
        for i in idx:
            tick, pose, is_open = tracks.gripper[i]
            lines.append(
                f"  tick {tick}: position [{pose.x:.4f}, {pose.y:.4f}, "
                f"{pose.z:.4f}], yaw {pose.yaw:.4f}, "
                f"{'open' if is_open else 'closed'}"
            )
        blocks.append(_render_series(lines, "gripper"))
    body = "\n".join(blocks)
    return (
        "A robot just executed a task, and the motion of everything on the "
        "table was recorded. Decide from the numbers below whether the task "
        "was completed successfully.\n\n"
        f"Task: {instruction}\n\n"
        "Recorded tracks (positions and dimensions in meters, yaw in "
        "radians):\n\n"
        f"{body}\n"
        "Explain your reasoning, then answer on a final line that is "
        f"exactly either\n{VERDICT_TRUE}\nor\n{VERDICT_FALSE}\n"
    )


_VERDICT_RE = re.compile(r"task completed:\s*(true|false)", re.IGNORECASE)


def parse_success_verdict(text: str) -> bool:
    """Scan for the final occurrence of the contract line, case-insensitive."""
    matches = _VERDICT_RE.findall(text)
    if not matches:
        raise VerdictUnparseable(
            f"the reply must end with {VERDICT_TRUE!r} or {VERDICT_FALSE!r}"
        )
    return matches[-1].lower() == "true"


# ── Re-planning ──────────────────────────────────────────────────────────

def build_failure_summary_request(instruction: str, tracks: ObjectTracks) -> str:
    """Ask the model to explain the failure, given the same numeric tracks
    the verdict was based on."""
    track_prompt = build_success_prompt(instruction, tracks)
    track_body = track_prompt.split("Recorded tracks", 1)[1]
    return (
        "A robot attempted a task and failed. From the recorded motion below,"
        " summarize in at most "
        f"{SUMMARY_WORD_CAP} words why the attempt failed and what should be "
        "done differently on the next attempt.\n\n"
        f"Task: {instruction}\n\nRecorded tracks{track_body}"
    )


def request_failure_summary(backend, instruction: str, tracks: ObjectTracks,
                            params=None) -> tuple[str, list[ChatMessage]]:
    """One summary exchange; an empty reply is re-queried once, then replaced
    by a fixed placeholder. Returns (summary, exchange messages)."""
    history = [ChatMessage("user", build_failure_summary_request(instruction, tracks))]
    reply = backend.chat(history, params)
    history.append(reply)
    if not reply.content.strip():
        history.append(ChatMessage(
            "user", "Please provide the failure summary now, as plain text."))
        reply = backend.chat(history, params)
        history.append(reply)
    summary = reply.content.strip() or FALLBACK_SUMMARY
    return summary, history


# ── Task-agnosticism support ─────────────────────────────────────────────

def find_vocabulary_hits(text: str, vocabulary) -> list[str]:
    """Which of the given words occur in the text (word-boundary match)."""
    lowered = text.lower()
    hits = [
        w for w in sorted(set(vocabulary))
        if re.search(rf"\b{re.escape(w.lower())}\b", lowered)
    ]
    return hits
