"""Checker tests: the shipped pass/fail calibration pairs, hand-built
threshold cases, analytic circle paths, and frame-shift consistency."""

import json
import math
from importlib import resources

import pytest

from trajbench.catalog import load_all_tasks, task_ids
from trajbench.checkers import (
    CheckerError,
    UnknownTask,
    check_success,
    final_attempt_ticks,
    parse_episode_log,
    run_checker,
)

ALL_TASK_IDS = task_ids()


def calibration_log(task_id: str, kind: str) -> str:
    path = (resources.files("trajbench") / "tasks" / "calibration"
            / task_id / f"{kind}.jsonl")
    return path.read_text(encoding="utf-8")


def simple_log(obj_series, gripper=None, dims=(0.07, 0.07, 0.07)):
    """Tick records from per-object position/yaw series:
    obj_series = {name: [(x, y, z, yaw), ...]}."""
    n = max([len(v) for v in obj_series.values()]
            + ([len(gripper)] if gripper else []))
    records = [{"type": "attempt", "index": 0}]
    for i in range(n):
        objects = {}
        for name, series in obj_series.items():
            x, y, z, yaw = series[min(i, len(series) - 1)]
            objects[name] = {"position": [x, y, z], "orientation": yaw,
                             "dimensions": list(dims)}
        grip = gripper[min(i, len(gripper) - 1)] if gripper else (0, 0.3, 0.4, 0, True)
        records.append({
            "type": "tick", "tick": i,
            "gripper": list(grip[:4]), "gripper_open": grip[4],
            "objects": objects,
        })
    return records


class TestCalibrationPairs:
    @pytest.mark.parametrize("task_id", ALL_TASK_IDS)
    def test_pass_log_passes(self, task_id):
        assert check_success(task_id, calibration_log(task_id, "pass")) is True

    @pytest.mark.parametrize("task_id", ALL_TASK_IDS)
    def test_fail_log_fails(self, task_id):
        assert check_success(task_id, calibration_log(task_id, "fail")) is False

    def test_every_task_ships_a_pair(self):
        assert len(ALL_TASK_IDS) == 30
        for task_id in ALL_TASK_IDS:
            assert calibration_log(task_id, "pass")
            assert calibration_log(task_id, "fail")


class TestLiftThresholds:
    def _log(self, z0, z1):
        series = {"target": [(0.1, 0.4, z0, 0.0), (0.1, 0.4, z1, 0.0)]}
        return simple_log(series)

    def test_ten_centimeters_is_enough(self):
        # 0.037 -> 0.187 rises exactly 0.15
        log = self._log(0.037, 0.187)
        assert run_checker({"id": "lift", "params": {"target": "target"}}, log)

    def test_five_centimeters_is_not(self):
        log = self._log(0.037, 0.087)
        assert not run_checker({"id": "lift", "params": {"target": "target"}}, log)

    def test_threshold_boundary(self):
        assert run_checker({"id": "lift", "params": {"target": "target"}},
                           self._log(0.0, 0.10))
        assert not run_checker({"id": "lift", "params": {"target": "target"}},
                               self._log(0.0, 0.0999))


class TestCirclePaths:
    def _gripper_circle(self, radius, center=(0.0, 0.3), points=72):
        grip = [(center[0] + radius, center[1], 0.2, 0.0, False)]
        for k in range(points + 1):
            ang = 2 * math.pi * k / points
            grip.append((center[0] + radius * math.cos(ang),
                         center[1] + radius * math.sin(ang), 0.005, 0.0, False))
        return simple_log({"dummy": [(0.3, 0.6, 0.02, 0.0)]}, gripper=grip)

    def test_exact_circle_passes(self):
        log = self._gripper_circle(0.05)
        assert check_success("draw_circle", log)

    def test_wrong_radius_fails(self):
        assert not check_success("draw_circle", self._gripper_circle(0.08))

    def test_open_gripper_fails(self):
        grip = [(0.05, 0.3, 0.005, 0.0, True)] * 30
        log = simple_log({"dummy": [(0.3, 0.6, 0.02, 0.0)]}, gripper=grip)
        assert not check_success("draw_circle", log)

    def test_partial_arc_fails(self):
        # a quarter arc has the right radius but not the sweep
        grip = []
        for k in range(19):
            ang = (math.pi / 2) * k / 18
            grip.append((0.05 * math.cos(ang), 0.3 + 0.05 * math.sin(ang),
                         0.005, 0.0, False))
        log = simple_log({"dummy": [(0.3, 0.6, 0.02, 0.0)]}, gripper=grip)
        assert not check_success("draw_circle", log)


class TestFrameShiftConsistency:
    def _translate(self, records, dx, dy):
        out = []
        for rec in json.loads(json.dumps(records)):
            if rec.get("type") == "tick":
                rec["gripper"][0] += dx
                rec["gripper"][1] += dy
                for obj in rec["objects"].values():
                    obj["position"][0] += dx
                    obj["position"][1] += dy
            out.append(rec)
        return out

    def test_relative_checkers_unchanged(self):
        for task_id, checker_id in [("pick_chip_bag_left", "lift"),
                                    ("move_banana_near_pear", "proximity"),
                                    ("push_can_right", "push_direction")]:
            records = parse_episode_log(calibration_log(task_id, "pass"))
            shifted = self._translate(records, 0.05, -0.04)
            scene = load_all_tasks()[task_id]
            assert run_checker(scene.checker, records)
            assert run_checker(scene.checker, shifted), task_id

    def test_absolute_circle_checker_changes(self):
        records = parse_episode_log(calibration_log("draw_circle", "pass"))
        assert check_success("draw_circle", records)
        shifted = self._translate(records, 0.05, 0.0)
        scene = load_all_tasks()["draw_circle"]
        assert not run_checker(scene.checker, shifted)


class TestLogHandling:
    def test_purity_same_bytes_same_verdict(self):
        text = calibration_log("place_apple_in_bowl", "pass")
        copied = str(text)
        assert check_success("place_apple_in_bowl", text) == \
            check_success("place_apple_in_bowl", copied) is True

    def test_accepts_bytes_lines_and_records(self):
        text = calibration_log("pick_up_bowl", "pass")
        assert check_success("pick_up_bowl", text.encode()) is True
        assert check_success("pick_up_bowl", text.splitlines()) is True
        assert check_success("pick_up_bowl", parse_episode_log(text)) is True

    def test_unknown_task(self):
        with pytest.raises(UnknownTask):
            check_success("juggle_swords", "")

    def test_final_attempt_segmentation(self):
        fail_first = parse_episode_log(calibration_log("pick_up_bowl", "fail"))
        pass_last = parse_episode_log(calibration_log("pick_up_bowl", "pass"))
        combined = fail_first + [{"type": "attempt", "index": 1}] + [
            r for r in pass_last if r.get("type") == "tick"]
        assert check_success("pick_up_bowl", combined) is True
        ticks = final_attempt_ticks(combined)
        assert ticks[0]["tick"] == 0

    def test_empty_log_rejected(self):
        with pytest.raises(CheckerError):
            final_attempt_ticks([{"type": "attempt", "index": 0}])


def test_rotation_checker_sees_full_turns():
    # three quarters of a turn accumulated in small wrapped increments
    series = [(0.0, 0.45, 0.135, 2 * math.pi * k / 40) for k in range(31)]
    log = simple_log({"bottle cap": series}, dims=(0.03, 0.03, 0.03))
    assert run_checker({"id": "rotate_lifted",
                        "params": {"target": "bottle cap",
                                   "min_rotation": math.pi / 2,
                                   "max_lift": 0.01}}, log)
