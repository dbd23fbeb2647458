"""The episode control loop.

One attempt: assemble prompt, query the model, parse its output (with the
bounded correction loop), execute the motion (sandboxed program in code mode,
direct simulator execution in numeric mode), then ask the model for a success
verdict over the recorded tracks. On a FALSE verdict with re-plans remaining,
the scene resets to the same seed, the model summarizes the failure, and the
next attempt runs with that summary appended to the prompt.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .chat import ChatMessage, ChatParams
from .checkers import run_checker
from .gateway import (
    COMPLETED,
    EXCEPTION,
    EpisodeContext,
    RunResult,
    serve_call,
)
from .geometry import GripperCommand, densify
from .parsing import (
    MAX_CORRECTIONS,
    ParseError,
    extract_code_blocks,
    parse_numeric_trajectory,
    validate_trajectory,
)
from .prompts import (
    PromptBundle,
    PromptConfig,
    VerdictUnparseable,
    build_main_prompt,
    build_success_prompt,
    parse_success_verdict,
    request_failure_summary,
)
from .simulator import Simulator, TaskScene

DEFAULT_MAX_REPLANS = 2  # a third attempt is the last, as in the bowl recovery
DEFAULT_TRIALS = 5

POS_STEP = 0.01
YAW_STEP = 0.05


class OrchestratorError(Exception):
    pass


@dataclass
class AttemptRecord:
    index: int
    output_kind: str  # "code" | "numeric" | "invalid"
    corrections: int
    run_results: list[RunResult]
    llm_verdict: bool | None
    checker_verdict: bool
    messages: list[ChatMessage]
    verdict_messages: list[ChatMessage] = field(default_factory=list)
    summary_messages: list[ChatMessage] = field(default_factory=list)


@dataclass
class EpisodeResult:
    task_id: str
    seed: int
    attempts: list[AttemptRecord]
    task_completed: bool
    checker_verdict: bool
    llm_queries: int
    log_records: list[dict]
    manual_error_label: str | None = None

    @property
    def replans_used(self) -> int:
        return len(self.attempts) - 1

    @property
    def executable(self) -> bool:
        return all(a.output_kind != "invalid" for a in self.attempts)

    @property
    def corrections(self) -> int:
        return sum(a.corrections for a in self.attempts)

    def log_bytes(self) -> bytes:
        return b"".join(
            json.dumps(rec).encode("utf-8") + b"\n" for rec in self.log_records
        )


def query_budget(max_replans: int) -> int:
    """Upper bound on model queries: (1 + 3 corrections) per attempt, plus a
    2-message budget for each verdict and each summary exchange."""
    attempts = max_replans + 1
    return (1 + MAX_CORRECTIONS) * attempts + 2 * attempts + 2 * max_replans


class _CountingBackend:
    def __init__(self, inner):
        self.inner = inner
        self.queries = 0

    def chat(self, history, params=None):
        self.queries += 1
        return self.inner.chat(history, params)


def _snapshot_records(history) -> list[dict]:
    records = []
    for snap in history:
        records.append({
            "type": "tick",
            "tick": snap.tick,
            "gripper": [snap.gripper.x, snap.gripper.y, snap.gripper.z,
                        snap.gripper.yaw],
            "gripper_open": snap.gripper_open,
            "objects": {
                name: {
                    "position": list(box.position),
                    "orientation": box.yaw,
                    "dimensions": list(box.dimensions),
                }
                for name, box in snap.objects.items()
            },
        })
    return records


def run_episode(task: TaskScene, seed: int, cfg: PromptConfig, backend,
                runner=None, max_replans: int = DEFAULT_MAX_REPLANS,
                noise_sigma: float = 0.0, params: ChatParams | None = None,
                log_dir: str | None = None) -> EpisodeResult:
    """One full episode of the control loop; always returns an EpisodeResult
    (failures are recorded outcomes, not exceptions)."""
    cfg.validate()
    if cfg.output_mode == "code" and runner is None:
        raise OrchestratorError("code mode needs a program runner")
    counting = _CountingBackend(backend)
    main_prompt = build_main_prompt(cfg)
    summary: str | None = None
    attempts: list[AttemptRecord] = []
    log_records: list[dict] = []
    task_completed = False

    for attempt_index in range(max_replans + 1):
        sim = Simulator(task, noise_sigma=noise_sigma)
        sim.reset(seed)
        log_records.append({"type": "attempt", "index": attempt_index})
        attempt = _run_attempt(
            attempt_index, task, sim, cfg, counting, runner, main_prompt,
            summary, params,
        )
        attempt_ticks = _snapshot_records(sim.history)
        log_records.extend(attempt_ticks)
        attempt.checker_verdict = run_checker(
            task.checker, [{"type": "attempt", "index": 0}] + attempt_ticks)
        attempts.append(attempt)
        log_records.append({
            "type": "verdict", "attempt": attempt_index,
            "llm": bool(attempt.llm_verdict),
            "checker": attempt.checker_verdict,
        })
        if attempt.output_kind == "invalid":
            break
        task_completed = bool(attempt.llm_verdict)
        if task_completed or attempt_index == max_replans:
            break
        summary, attempt.summary_messages = request_failure_summary(
            counting, task.instruction, sim.tracks(), params)

    result = EpisodeResult(
        task_id=task.task_id,
        seed=seed,
        attempts=attempts,
        task_completed=task_completed,
        checker_verdict=attempts[-1].checker_verdict,
        llm_queries=counting.queries,
        log_records=log_records,
    )
    log_records.append({
        "type": "result",
        "task_completed": result.task_completed,
        "replans_used": result.replans_used,
        "manual_error_label": result.manual_error_label,
    })
    if log_dir is not None:
        path = os.path.join(log_dir, task.task_id, str(seed))
        os.makedirs(path, exist_ok=True)
        with open(os.path.join(path, "episode.jsonl"), "wb") as fh:
            fh.write(result.log_bytes())
    return result


def _run_attempt(index, task, sim, cfg, backend, runner, main_prompt,
                 summary, params) -> AttemptRecord:
    bundle = PromptBundle(main_prompt, task.instruction, summary)
    history = bundle.messages(cfg.as_system_message)
    history.append(backend.chat(history, params))
    attempt = AttemptRecord(
        index=index, output_kind="invalid", corrections=0,
        run_results=[], llm_verdict=None, checker_verdict=False,
        messages=history,
    )
    ctx = EpisodeContext()
    handler = lambda req: serve_call(req, sim, ctx, POS_STEP, YAW_STEP)  # noqa: E731

    motion_done = False
    while attempt.corrections <= MAX_CORRECTIONS:
        error_text = None
        try:
            if cfg.output_mode == "code":
                blocks = extract_code_blocks(history[-1].content)
                if not blocks:
                    raise ParseError("the reply contains no ```python code block")
                result = runner.run("\n\n".join(blocks), handler)
                attempt.run_results.append(result)
                if result.outcome == COMPLETED:
                    motion_done = True
                elif result.outcome == EXCEPTION:
                    error_text = result.detail or "the program raised an exception"
                else:
                    error_text = (
                        f"the program did not finish ({result.outcome}): "
                        f"{result.detail}"
                    )
            else:
                trajectory = parse_numeric_trajectory(
                    history[-1].content, cfg.gripper_mode)
                violations = validate_trajectory(trajectory)
                if violations:
                    raise ParseError(
                        "the trajectory is not executable: "
                        + "; ".join(v.detail for v in violations)
                    )
                _execute_numeric(sim, trajectory)
                motion_done = True
        except ParseError as err:
            error_text = str(err)
        if motion_done:
            attempt.output_kind = cfg.output_mode
            break
        if attempt.corrections == MAX_CORRECTIONS:
            attempt.output_kind = "invalid"
            return attempt
        attempt.corrections += 1
        history.append(ChatMessage("user", error_text))
        history.append(backend.chat(history, params))

    attempt.llm_verdict, attempt.verdict_messages = _ask_verdict(
        backend, task.instruction, sim, params)
    return attempt


def _execute_numeric(sim: Simulator, trajectory):
    dense = densify(trajectory, POS_STEP, YAW_STEP)
    for element in dense:
        if isinstance(element, GripperCommand):
            sim.set_gripper(open_=element is GripperCommand.OPEN)
        else:
            sim.step_to(element)


def _ask_verdict(backend, instruction, sim, params) -> tuple[bool, list[ChatMessage]]:
    history = [ChatMessage("user", build_success_prompt(instruction, sim.tracks()))]
    history.append(backend.chat(history, params))
    try:
        return parse_success_verdict(history[-1].content), history
    except VerdictUnparseable as err:
        history.append(ChatMessage("user", str(err)))
        history.append(backend.chat(history, params))
        try:
            return parse_success_verdict(history[-1].content), history
        except VerdictUnparseable:
            return False, history


@dataclass
class TrialsResult:
    task_id: str
    trials: int
    successes: int  # ground-truth checker verdicts
    rate: float
    llm_agreement: float  # fraction of episodes where model verdict == checker
    executable_pct: float
    corrections_mean: float
    episodes: list[EpisodeResult]


def run_trials(task: TaskScene, n: int, base_seed: int, cfg: PromptConfig,
               backend_factory, runner_factory=None,
               max_replans: int = DEFAULT_MAX_REPLANS,
               noise_sigma: float = 0.0, log_dir: str | None = None) -> TrialsResult:
    """n episodes with seeds base_seed..base_seed+n-1; success is counted by
    the ground-truth checker, never the model's own verdict."""
    if n < 1:
        raise ValueError("need at least one trial")
    episodes = []
    for seed in range(base_seed, base_seed + n):
        runner = runner_factory(seed) if runner_factory else None
        episodes.append(
            run_episode(task, seed, cfg, backend_factory(seed), runner=runner,
                        max_replans=max_replans, noise_sigma=noise_sigma,
                        log_dir=log_dir)
        )
    successes = sum(e.checker_verdict for e in episodes)
    agreement = sum(e.task_completed == e.checker_verdict for e in episodes) / n
    executable = sum(e.executable for e in episodes) / n
    corrections = sum(e.corrections for e in episodes) / n
    return TrialsResult(
        task_id=task.task_id, trials=n, successes=successes, rate=successes / n,
        llm_agreement=agreement, executable_pct=100.0 * executable,
        corrections_mean=corrections, episodes=episodes,
    )
