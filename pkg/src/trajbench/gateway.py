"""Bridge between generated programs and the simulator.

A program runs in an isolated child process (the runner executable) and
talks to this gateway over newline-delimited JSON on its stdio: requests
{"id": N, "method": ..., "params": {...}} are answered with {"id": N,
"result": {...}} or {"id": N, "error": {"message": ...}}. The five methods
and their arities are frozen; the code itself is delivered as message id 0,
method load_program. Recorded call lists can be replayed against the same
serving path without any child process, which keeps the rest of the test
suite independent of the runner.
"""

from __future__ import annotations

import json
import math
import os
import queue
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass, field

from .geometry import Pose, Trajectory, densify
from .simulator import ObjectNotFound, Simulator

API_METHODS = (
    "detect_object",
    "execute_trajectory",
    "open_gripper",
    "close_gripper",
    "task_completed",
)

DEFAULT_WALL_CLOCK = 120.0  # seconds
DEFAULT_OUTPUT_CAP = 1 << 20  # 1 MiB of child stdout

COMPLETED = "completed"
EXCEPTION = "exception"
TIMEOUT = "timeout"
PROTOCOL_ERROR = "protocol_error"


class GatewayError(Exception):
    pass


class SpawnError(GatewayError):
    pass


class ApiError(Exception):
    """Error reply to the child; the message may be surfaced by the
    generated program and ultimately by the model."""


@dataclass(frozen=True)
class ApiRequest:
    id: int
    method: str
    params: dict

    def __post_init__(self):
        if self.method not in API_METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.id <= 0:
            raise ValueError("request ids start at 1")


@dataclass
class RunResult:
    outcome: str  # COMPLETED | EXCEPTION | TIMEOUT | PROTOCOL_ERROR
    detail: str = ""  # traceback text / protocol diagnostics
    api_calls: list[ApiRequest] = field(default_factory=list)

    @property
    def completed(self) -> bool:
        return self.outcome == COMPLETED


@dataclass
class EpisodeContext:
    """Mutable per-attempt flags the served calls update."""

    task_completed: bool = False
    ticks_executed: int = 0


def serve_call(req: ApiRequest, sim: Simulator, ctx: EpisodeContext,
               pos_step: float = 0.01, yaw_step: float = 0.05) -> dict:
    """Serve one robot-API call against the simulator; raises ApiError for
    error replies."""
    if req.method == "detect_object":
        name = req.params.get("object")
        if not isinstance(name, str) or not name:
            raise ApiError("detect_object requires a non-empty name string")
        try:
            box = sim.detect_object(name)
        except ObjectNotFound as err:
            raise ApiError(str(err)) from None
        return {
            "position": list(box.position),
            "orientation": box.yaw,
            "dimensions": list(box.dimensions),
        }
    if req.method == "execute_trajectory":
        rows = req.params.get("trajectory")
        poses = _parse_rows(rows)
        dense = densify(Trajectory(poses), pos_step, yaw_step)
        ticks = 0
        for pose in dense.poses():
            sim.step_to(pose)
            ticks += 1
        ctx.ticks_executed += ticks
        return {"status": "done", "ticks": ticks}
    if req.method == "open_gripper":
        sim.set_gripper(open_=True)
        return {"status": "done"}
    if req.method == "close_gripper":
        sim.set_gripper(open_=False)
        return {"status": "done"}
    if req.method == "task_completed":
        ctx.task_completed = True
        return {"acknowledged": True}
    raise ApiError(f"unknown method {req.method!r}")


def _parse_rows(rows) -> list[Pose]:
    if not isinstance(rows, list) or not rows:
        raise ApiError("execute_trajectory requires a non-empty list of rows")
    poses = []
    for i, row in enumerate(rows):
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise ApiError(f"trajectory row {i} must have exactly 4 elements")
        try:
            values = [float(v) for v in row]
        except (TypeError, ValueError):
            raise ApiError(f"trajectory row {i} contains a non-number") from None
        if not all(math.isfinite(v) for v in values):
            raise ApiError(f"trajectory row {i} contains a non-finite value")
        poses.append(Pose(*values))
    return poses


# ── Runners ──────────────────────────────────────────────────────────────

class RecordedCallsRunner:
    """Replays previously recorded api_calls through the handler, one
    recorded execution per run() call. Equivalent to running the original
    program: the serving path is identical, only the child is absent."""

    def __init__(self, executions: list[dict]):
        # each execution: {"calls": [{"method":..., "params":...}], "outcome":..., "detail":...}
        self._executions = list(executions)
        self._next = 0
        self.runs = 0

    def run(self, code: str, handler) -> RunResult:
        if self._next >= len(self._executions):
            raise GatewayError("no recorded execution left to replay")
        execution = self._executions[self._next]
        self._next += 1
        self.runs += 1
        calls = []
        for i, call in enumerate(execution["calls"], start=1):
            req = ApiRequest(id=i, method=call["method"], params=call.get("params", {}))
            calls.append(req)
            try:
                handler(req)
            except ApiError:
                pass  # the recorded program saw the error reply and went on
        return RunResult(
            outcome=execution.get("outcome", COMPLETED),
            detail=execution.get("detail", ""),
            api_calls=calls,
        )


class CallRecorder:
    """Handler wrapper capturing served calls for later replay."""

    def __init__(self, handler):
        self._handler = handler
        self.calls: list[dict] = []

    def __call__(self, req: ApiRequest):
        self.calls.append({"method": req.method, "params": req.params})
        return self._handler(req)


class InProcessRunner:
    """Executes TRUSTED code in this process with the five API shims bound to
    the handler. No sandboxing whatsoever: fixture generation and tests only,
    never model output."""

    def run(self, code: str, handler) -> RunResult:
        import math as _math
        import traceback

        counter = {"id": 0}
        calls: list[ApiRequest] = []

        def call(method, **params):
            counter["id"] += 1
            req = ApiRequest(counter["id"], method, params)
            calls.append(req)
            try:
                return handler(req)
            except ApiError as err:
                raise RuntimeError(str(err)) from None

        namespace = {
            "detect_object": lambda name: call("detect_object", object=str(name)),
            "execute_trajectory": lambda rows: call(
                "execute_trajectory",
                trajectory=[[float(v) for v in row] for row in rows],
            ),
            "open_gripper": lambda: call("open_gripper"),
            "close_gripper": lambda: call("close_gripper"),
            "task_completed": lambda: call("task_completed"),
            "math": _math,
        }
        try:
            exec(code, namespace)  # noqa: S102 - trusted fixture code
        except Exception:
            return RunResult(EXCEPTION, traceback.format_exc(), calls)
        return RunResult(COMPLETED, "", calls)


class RecordingRunner:
    """Wraps a runner and keeps each execution's served calls in replayable
    form (the RecordedCallsRunner input format)."""

    def __init__(self, inner):
        self._inner = inner
        self.executions: list[dict] = []

    def run(self, code: str, handler) -> RunResult:
        result = self._inner.run(code, handler)
        self.executions.append({
            "calls": [{"method": c.method, "params": c.params}
                      for c in result.api_calls],
            "outcome": result.outcome,
            "detail": result.detail,
        })
        return result


class SubprocessRunner:
    """Spawns the runner executable per program with no inherited state: a
    scrubbed environment, a fresh temp working directory, and stdio pipes."""

    def __init__(self, runner: str | list[str],
                 wall_clock: float = DEFAULT_WALL_CLOCK,
                 output_cap: int = DEFAULT_OUTPUT_CAP):
        if isinstance(runner, str):
            if runner.endswith(".py"):
                self.argv = [sys.executable, runner]
            else:
                self.argv = [runner]
        else:
            self.argv = list(runner)
        self.wall_clock = wall_clock
        self.output_cap = output_cap
        self.spawns = 0

    def run(self, code: str, handler) -> RunResult:
        self.spawns += 1
        deadline = time.monotonic() + self.wall_clock
        with tempfile.TemporaryDirectory(prefix="sandbox-") as workdir:
            try:
                child = subprocess.Popen(
                    self.argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.DEVNULL,
                    cwd=workdir,
                    env={"PATH": os.environ.get("PATH", ""), "PYTHONUNBUFFERED": "1"},
                    text=True,
                )
            except OSError as err:
                raise SpawnError(f"could not spawn runner {self.argv}: {err}") from err
            try:
                return self._serve(child, code, handler, deadline)
            finally:
                if child.poll() is None:
                    child.kill()
                child.wait()

    def _serve(self, child, code, handler, deadline) -> RunResult:
        lines: queue.Queue = queue.Queue()

        def pump():
            read = 0
            for line in child.stdout:
                read += len(line)
                if read > self.output_cap:
                    lines.put(("overflow", None))
                    return
                lines.put(("line", line))
            lines.put(("eof", None))

        threading.Thread(target=pump, daemon=True).start()

        def send(doc):
            try:
                child.stdin.write(json.dumps(doc) + "\n")
                child.stdin.flush()
            except (BrokenPipeError, OSError):
                pass  # child death surfaces via the read loop

        send({"id": 0, "method": "load_program", "params": {"code": code}})
        calls: list[ApiRequest] = []
        last_id = 0
        while True:
            try:
                kind, payload = lines.get(timeout=max(0.0, deadline - time.monotonic()))
            except queue.Empty:
                child.kill()
                return RunResult(TIMEOUT, f"wall clock limit {self.wall_clock} s "
                                 "exceeded", calls)
            if kind == "overflow":
                child.kill()
                return RunResult(PROTOCOL_ERROR,
                                 f"child output exceeded {self.output_cap} bytes", calls)
            if kind == "eof":
                return RunResult(PROTOCOL_ERROR,
                                 "child exited without a completion event", calls)
            try:
                doc = json.loads(payload)
                if not isinstance(doc, dict):
                    raise ValueError("not an object")
            except ValueError:
                child.kill()
                return RunResult(PROTOCOL_ERROR,
                                 f"malformed request line: {payload[:200]!r}", calls)
            if doc.get("id") == -1:
                event = doc.get("event")
                if event == "completed":
                    return RunResult(COMPLETED, "", calls)
                if event == "exception":
                    return RunResult(EXCEPTION, str(doc.get("traceback", "")), calls)
                child.kill()
                return RunResult(PROTOCOL_ERROR, f"unknown event {event!r}", calls)
            try:
                req = ApiRequest(
                    id=doc.get("id", 0), method=doc.get("method", ""),
                    params=doc.get("params") or {},
                )
                if req.id <= last_id:
                    raise ValueError(f"id {req.id} is not strictly increasing")
                last_id = req.id
            except ValueError as err:
                child.kill()
                return RunResult(PROTOCOL_ERROR, f"bad request: {err}", calls)
            calls.append(req)
            try:
                result = handler(req)
                send({"id": req.id, "result": result})
            except ApiError as err:
                send({"id": req.id, "error": {"message": str(err)}})
