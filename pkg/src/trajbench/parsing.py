"""Extraction and validation of the two LLM output modalities.

Code arrives between ```python fences; numeric trajectories arrive as a
bracketed list between the literal <trajectory> and </trajectory> tags.
Parse failures feed a bounded self-correction loop: the exact error text is
sent back and the model gets at most three chances to fix its output.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .geometry import GripperCommand, Pose, Trajectory
from .simulator import WORKSPACE

MAX_CORRECTIONS = 3

TRAJECTORY_OPEN = "<trajectory>"
TRAJECTORY_CLOSE = "</trajectory>"

CODE_FENCE_TAG = "python"


class ParseError(Exception):
    """Base for recoverable output-format errors; str(err) is the exact text
    fed back to the model."""


class UnterminatedFence(ParseError):
    pass


class MissingTags(ParseError):
    pass


class BadArity(ParseError):
    def __init__(self, row_index: int, message: str):
        super().__init__(message)
        self.row_index = row_index


class ForbiddenCode(ParseError):
    pass


class BadNumber(ParseError):
    pass


class EmptyTrajectory(ParseError):
    pass


@dataclass
class ParsedCode:
    blocks: list[str]


@dataclass
class ParsedTrajectory:
    trajectory: Trajectory


@dataclass
class ParseFailure:
    reason: str


def extract_code_blocks(text: str, language: str = CODE_FENCE_TAG) -> list[str]:
    """Return the contents of every fenced block tagged with `language`,
    in order, fence lines excluded and inner text byte-preserved."""
    lines = text.split("\n")
    blocks: list[str] = []
    open_tag = None  # info string of the fence we are inside
    start = 0
    for i, line in enumerate(lines):
        stripped = line.strip()
        if open_tag is None:
            if stripped.startswith("```") and stripped != "```":
                open_tag = stripped[3:].strip()
                start = i + 1
            continue
        if stripped == "```":
            if open_tag == language:
                blocks.append("\n".join(lines[start:i]))
            open_tag = None
    if open_tag == language:
        raise UnterminatedFence(
            f"a ```{language} code fence was opened but never closed with ```"
        )
    return blocks


_ROW_OR_TOKEN = re.compile(r"\[([^\[\]]*)\]|open_gripper|close_gripper")
_FUNCTION_KEYWORDS = re.compile(r"\b(def|lambda)\b")


def parse_numeric_trajectory(text: str, gripper_mode: str = "explicit") -> Trajectory:
    """Parse a tagged numeric trajectory.

    explicit mode: 4-element rows [x, y, z, yaw], optionally interleaved with
    the bare tokens open_gripper / close_gripper.
    binary mode: 5-element rows [x, y, z, yaw, g] with g in {0, 1}; gripper
    commands are inserted wherever g changes (the state applies once the
    waypoint is reached; the gripper starts open).
    """
    if gripper_mode not in ("explicit", "binary"):
        raise ValueError(f"unknown gripper mode {gripper_mode!r}")
    lower = text
    start = lower.find(TRAJECTORY_OPEN)
    if start < 0:
        raise MissingTags(f"could not find the literal {TRAJECTORY_OPEN} tag")
    end = lower.find(TRAJECTORY_CLOSE, start)
    if end < 0:
        raise MissingTags(f"could not find the closing {TRAJECTORY_CLOSE} tag")
    inner = text[start + len(TRAJECTORY_OPEN):end]
    if _FUNCTION_KEYWORDS.search(inner):
        raise ForbiddenCode(
            "the trajectory tags must contain only a list of numbers, "
            "not Python function definitions"
        )
    arity = 4 if gripper_mode == "explicit" else 5
    elements: list = []
    open_state = True
    row_index = 0
    for match in _ROW_OR_TOKEN.finditer(inner):
        token = match.group(0)
        if token == "open_gripper":
            elements.append(GripperCommand.OPEN)
            continue
        if token == "close_gripper":
            elements.append(GripperCommand.CLOSE)
            continue
        fields = [f for f in match.group(1).split(",") if f.strip()]
        if not fields:
            continue  # the outer list bracket matches as an empty row
        if len(fields) != arity:
            raise BadArity(
                row_index,
                f"row {row_index} has {len(fields)} elements, expected {arity}",
            )
        values = []
        for f in fields:
            try:
                v = float(f)
            except ValueError:
                raise BadNumber(f"row {row_index}: {f.strip()!r} is not a number") from None
            if not math.isfinite(v):
                raise BadNumber(f"row {row_index}: {f.strip()!r} is not finite")
            values.append(v)
        if gripper_mode == "explicit":
            elements.append(Pose(*values))
        else:
            g = values[4]
            if g not in (0.0, 1.0):
                raise BadNumber(f"row {row_index}: gripper flag must be 0 or 1, got {g}")
            elements.append(Pose(*values[:4]))
            want_open = g == 0.0
            if want_open != open_state:
                elements.append(GripperCommand.OPEN if want_open else GripperCommand.CLOSE)
                open_state = want_open
        row_index += 1
    if not any(isinstance(e, Pose) for e in elements):
        raise EmptyTrajectory("the trajectory contains no pose rows")
    return Trajectory(elements)


def format_numeric_trajectory(trajectory: Trajectory) -> str:
    """Serialize a trajectory in the explicit numeric wire format; the parser
    accepts everything this produces."""
    parts = []
    for el in trajectory:
        if isinstance(el, GripperCommand):
            parts.append(el.value)
        else:
            parts.append(f"[{el.x!r}, {el.y!r}, {el.z!r}, {el.yaw!r}]")
    return f"{TRAJECTORY_OPEN}[{', '.join(parts)}]{TRAJECTORY_CLOSE}"


def correction_loop(backend, parse, history: list,
                    max_corrections: int = MAX_CORRECTIONS):
    """Parse the last assistant message; on failure send the exact error text
    back and re-query, at most `max_corrections` times.

    Returns ParsedCode / ParsedTrajectory on success (whatever `parse`
    returns), or ParseFailure after the final failed round. `history` is
    extended in place with the correction exchange.
    """
    from .chat import ChatMessage  # local import to avoid a cycle

    if not history or history[-1].role != "assistant":
        raise ValueError("history must end with an assistant message")
    for round_ in range(max_corrections + 1):
        try:
            return parse(history[-1].content)
        except ParseError as err:
            if round_ == max_corrections:
                return ParseFailure(str(err))
            history.append(ChatMessage(role="user", content=str(err)))
            history.append(backend.chat(history))
    raise AssertionError("unreachable")


@dataclass
class Violation:
    kind: str  # "WorkspaceViolation" | "StepTooLarge" | "EmptyTrajectory"
    detail: str


MAX_RAW_STEP = 0.25  # pre-densification gap limit between consecutive poses


def validate_trajectory(trajectory: Trajectory, workspace=None) -> list[Violation]:
    """Report out-of-workspace poses, oversized pre-densification steps, and
    emptiness. An empty list means the trajectory is executable."""
    ws = workspace or WORKSPACE
    out: list[Violation] = []
    poses = trajectory.poses()
    if not poses:
        out.append(Violation("EmptyTrajectory", "the trajectory contains no poses"))
        return out
    for i, p in enumerate(poses):
        for axis, value in (("x", p.x), ("y", p.y), ("z", p.z)):
            lo, hi = ws[axis]
            if not (lo <= value <= hi):
                out.append(
                    Violation(
                        "WorkspaceViolation",
                        f"pose {i}: {axis} = {value} outside [{lo}, {hi}]",
                    )
                )
    for i, (a, b) in enumerate(zip(poses, poses[1:])):
        gap = a.position_distance(b)
        if gap > MAX_RAW_STEP:
            out.append(
                Violation(
                    "StepTooLarge",
                    f"poses {i} -> {i + 1} are {gap:.3f} m apart "
                    f"(limit {MAX_RAW_STEP} m before densification)",
                )
            )
    return out
