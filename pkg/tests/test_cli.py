"""CLI surface tests: run / bench / ablate / report round trips."""

import json
from pathlib import Path

import pytest

from trajbench.catalog import load_task
from trajbench.cli import main
from trajbench.simulator import Simulator

GOLDENS = Path(__file__).parent / "fixtures" / "goldens"


def scripted_push_file(tmp_path, seed=0) -> Path:
    can = Simulator(load_task("push_can_right")).reset(seed).objects["can"].pose
    reply = (
        f"<trajectory>[[{can.x - 0.08!r}, {can.y!r}, 0.25, 0.0], "
        f"[{can.x - 0.08!r}, {can.y!r}, 0.02, 0.0], "
        f"[{can.x + 0.12!r}, {can.y!r}, 0.02, 0.0]]</trajectory>"
    )
    path = tmp_path / "responses.json"
    path.write_text(json.dumps({"responses": [reply, "TASK COMPLETED: TRUE"]}))
    return path


class TestRunCommand:
    def test_scripted_single_trial(self, tmp_path, capsys):
        responses = scripted_push_file(tmp_path)
        rc = main([
            "run", "--task", "push_can_right", "--trials", "1",
            "--backend", "scripted", "--transcript", str(responses),
            "--output-mode", "numeric", "--out", str(tmp_path),
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "push_can_right: 1/1" in out
        log = tmp_path / "runs" / "push_can_right" / "0" / "episode.jsonl"
        assert log.exists()

    def test_replay_directory_layout(self, tmp_path, capsys):
        replay_root = tmp_path / "transcripts" / "draw_circle" / "0"
        replay_root.mkdir(parents=True)
        src = (GOLDENS / "circle" / "transcript.json").read_bytes()
        (replay_root / "transcript.json").write_bytes(src)
        rc = main([
            "run", "--task", "draw_circle", "--trials", "1",
            "--backend", "replay", "--transcript", str(tmp_path / "transcripts"),
            "--output-mode", "numeric", "--out", str(tmp_path),
        ])
        assert rc == 0
        assert "draw_circle: 1/1" in capsys.readouterr().out

    def test_code_mode_requires_runner(self, tmp_path):
        responses = scripted_push_file(tmp_path)
        with pytest.raises(SystemExit):
            main(["run", "--task", "push_can_right", "--backend", "scripted",
                  "--transcript", str(responses), "--output-mode", "code"])

    def test_replay_requires_transcript(self):
        with pytest.raises(SystemExit):
            main(["run", "--task", "push_can_right", "--backend", "replay",
                  "--output-mode", "numeric"])


class TestBenchCommand:
    def test_single_task_bench_outputs(self, tmp_path, capsys):
        responses = scripted_push_file(tmp_path)
        rc = main([
            "bench", "--tasks", "push_can_right", "--trials", "1",
            "--backend", "scripted", "--transcript", str(responses),
            "--output-mode", "numeric", "--out", str(tmp_path),
        ])
        assert rc == 0
        csv_text = (tmp_path / "results.csv").read_text()
        assert csv_text.splitlines()[0] == \
            "task,variant,trials,successes,rate,executable_pct"
        report = (tmp_path / "results.txt").read_text()
        assert "57.3%" in report


class TestAblateCommand:
    def test_one_flag_one_task(self, tmp_path, capsys):
        responses = scripted_push_file(tmp_path)
        rc = main([
            "ablate", "--tasks", "push_can_right", "--trials", "1",
            "--flag-off", "step_by_step_plan",
            "--backend", "scripted", "--transcript", str(responses),
            "--output-mode", "numeric", "--out", str(tmp_path),
        ])
        assert rc == 0
        lines = (tmp_path / "ablation.csv").read_text().splitlines()
        variants = {line.split(",")[1] for line in lines[1:]}
        assert variants == {"full", "no_step_by_step_plan"}


class TestReportCommand:
    def test_round_trip(self, tmp_path, capsys):
        responses = scripted_push_file(tmp_path)
        main([
            "bench", "--tasks", "push_can_right", "--trials", "1",
            "--backend", "scripted", "--transcript", str(responses),
            "--output-mode", "numeric", "--out", str(tmp_path),
        ])
        capsys.readouterr()
        rc = main(["report", "--results", str(tmp_path / "results.csv"),
                   "--out-file", str(tmp_path / "again.txt")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "push_can_right" in out
        assert (tmp_path / "again.txt").read_text().startswith("task")
