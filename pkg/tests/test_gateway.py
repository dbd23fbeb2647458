"""Gateway tests: call serving against the simulator, recorded-call replay,
and subprocess lifecycle handling driven by a protocol-speaking fake child."""

from pathlib import Path

import pytest

from trajbench.gateway import (
    ApiError,
    ApiRequest,
    CallRecorder,
    EpisodeContext,
    RecordedCallsRunner,
    SubprocessRunner,
    serve_call,
)
from trajbench.geometry import Pose
from trajbench.simulator import Cavity, Part, SceneObject, Simulator, TaskScene

FAKE_RUNNER = str(Path(__file__).parent / "fixtures" / "fake_runner.py")


def bowl_scene():
    bowl = SceneObject(
        name="bowl", shape="cylinder", dimensions=(0.075, 0.06),
        pose=Pose(0.10, 0.40, 0.03), graspable=True,
        parts={"rim": Part((0.065, 0.0, 0.015), (0.01, 0.03, 0.03))},
        cavities=[Cavity((0.0, 0.0), (0.1, 0.1), 0.01)],
    )
    return TaskScene("bowl_fixture", "pick up the bowl", [bowl], {},
                     {"id": "lift", "params": {"target": "bowl"}})


@pytest.fixture()
def sim():
    s = Simulator(bowl_scene())
    s.reset(seed=0)
    return s


def req(i, method, **params):
    return ApiRequest(id=i, method=method, params=params)


class TestServeCall:
    def test_detect_object_ground_truth(self, sim):
        ctx = EpisodeContext()
        out = serve_call(req(1, "detect_object", object="bowl"), sim, ctx)
        assert out == {
            "position": [0.10, 0.40, 0.03],
            "orientation": 0.0,
            "dimensions": [0.15, 0.15, 0.06],
        }

    def test_detect_miss_is_error_reply(self, sim):
        with pytest.raises(ApiError, match="object not found: sandwich"):
            serve_call(req(1, "detect_object", object="sandwich"), sim, EpisodeContext())

    def test_execute_trajectory_tick_count(self, sim):
        ctx = EpisodeContext()
        rows = [[0.0, 0.3, 0.3, 0.0], [0.1, 0.3, 0.3, 0.0]]  # 0.1 m apart
        out = serve_call(req(1, "execute_trajectory", trajectory=rows), sim, ctx)
        assert out == {"status": "done", "ticks": 11}
        assert ctx.ticks_executed == 11
        assert sim.state.gripper == Pose(0.1, 0.3, 0.3, 0.0)

    def test_execute_trajectory_row_validation(self, sim):
        ctx = EpisodeContext()
        with pytest.raises(ApiError, match="row 1"):
            serve_call(req(1, "execute_trajectory",
                           trajectory=[[0, 0.3, 0.3, 0], [1, 2]]), sim, ctx)
        with pytest.raises(ApiError, match="non-number"):
            serve_call(req(1, "execute_trajectory",
                           trajectory=[[0, 0.3, "high", 0]]), sim, ctx)

    def test_gripper_and_completion(self, sim):
        ctx = EpisodeContext()
        assert serve_call(req(1, "close_gripper"), sim, ctx) == {"status": "done"}
        assert not sim.state.gripper_open
        assert serve_call(req(2, "open_gripper"), sim, ctx) == {"status": "done"}
        assert sim.state.gripper_open
        assert not ctx.task_completed
        assert serve_call(req(3, "task_completed"), sim, ctx) == {"acknowledged": True}
        assert ctx.task_completed

    def test_unknown_method_rejected_at_construction(self):
        with pytest.raises(ValueError):
            ApiRequest(id=1, method="format_disk", params={})


class TestRecordedCallsRunner:
    def test_replay_reproduces_state_history(self, sim):
        # drive the serving path once while recording, then replay the
        # recording on a fresh simulator: identical state histories
        ctx = EpisodeContext()
        recorder = CallRecorder(lambda r: serve_call(r, sim, ctx))
        for i, call in enumerate([
            req(1, "detect_object", object="bowl"),
            req(2, "execute_trajectory",
                trajectory=[[0.1, 0.4, 0.3, 0.0], [0.1, 0.4, 0.1, 0.0]]),
            req(3, "close_gripper"),
            req(4, "task_completed"),
        ]):
            recorder(call)

        sim2 = Simulator(bowl_scene())
        sim2.reset(seed=0)
        ctx2 = EpisodeContext()
        runner = RecordedCallsRunner([{"calls": recorder.calls, "outcome": "completed"}])
        result = runner.run("ignored", lambda r: serve_call(r, sim2, ctx2))
        assert result.completed
        assert [c.method for c in result.api_calls] == [
            "detect_object", "execute_trajectory", "close_gripper", "task_completed"]
        assert ctx2.task_completed
        assert sim.history == sim2.history

    def test_ids_assigned_strictly_increasing(self):
        runner = RecordedCallsRunner(
            [{"calls": [{"method": "open_gripper", "params": {}}] * 3}])
        seen = []
        runner.run("", lambda r: seen.append(r.id) or {})
        assert seen == [1, 2, 3]


class TestSubprocessRunner:
    def _run(self, mode, sim, **kw):
        ctx = EpisodeContext()
        runner = SubprocessRunner(FAKE_RUNNER, **kw)
        result = runner.run(mode, lambda r: serve_call(r, sim, ctx))
        return result, ctx

    def test_ok_round_trip(self, sim):
        result, _ = self._run("ok", sim)
        assert result.completed
        assert [c.method for c in result.api_calls] == ["detect_object", "open_gripper"]

    def test_error_reply_surfaces_in_child(self, sim):
        result, _ = self._run("miss", sim)
        assert result.outcome == "exception"
        assert "object not found: sandwich" in result.detail

    def test_child_exception_traceback(self, sim):
        result, _ = self._run("exception", sim)
        assert result.outcome == "exception"
        assert "ZeroDivisionError" in result.detail

    def test_timeout_kills_child(self, sim):
        result, _ = self._run("sleep", sim, wall_clock=1.0)
        assert result.outcome == "timeout"

    def test_malformed_line_is_protocol_error(self, sim):
        result, _ = self._run("garbage", sim, wall_clock=5.0)
        assert result.outcome == "protocol_error"
        assert "malformed" in result.detail

    def test_non_monotonic_ids_rejected(self, sim):
        result, _ = self._run("badid", sim, wall_clock=5.0)
        assert result.outcome == "protocol_error"
        assert "strictly increasing" in result.detail

    def test_unknown_method_rejected(self, sim):
        result, _ = self._run("badmethod", sim, wall_clock=5.0)
        assert result.outcome == "protocol_error"

    def test_output_cap_enforced(self, sim):
        result, _ = self._run("flood", sim, wall_clock=5.0, output_cap=1 << 20)
        assert result.outcome == "protocol_error"
        assert "exceeded" in result.detail

    def test_silent_exit_is_protocol_error(self, sim):
        result, _ = self._run("silent_exit", sim, wall_clock=5.0)
        assert result.outcome == "protocol_error"
        assert "without a completion" in result.detail
