"""Command-line entry points: run episodes, sweep the benchmark, run prompt
ablations, and re-render reports."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bench import load_results_csv, run_ablation, run_benchmark
from .catalog import ABLATION_TASK_IDS, load_task, task_ids
from .chat import LiveBackend, ReplayBackend, ScriptedBackend, Transcript
from .gateway import SubprocessRunner
from .orchestrator import run_trials
from .prompts import ABLATION_FLAGS, PromptConfig


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0, help="base seed")
    parser.add_argument("--backend", choices=["live", "replay", "scripted"],
                        default="scripted")
    parser.add_argument("--transcript", help="replay transcript (file or "
                        "directory of <task>/<seed>/transcript.json), or a "
                        "JSON file of scripted responses")
    parser.add_argument("--output-mode", choices=["code", "numeric"],
                        default="code")
    parser.add_argument("--gripper-mode", choices=["explicit", "binary"],
                        default="explicit")
    parser.add_argument("--max-replans", type=int, default=2)
    parser.add_argument("--noise-sigma", type=float, default=0.0,
                        help="detection noise std in meters")
    parser.add_argument("--runner", help="sandbox runner executable "
                        "(required for code mode with live backends)")
    parser.add_argument("--llm-base-url", default="https://api.openai.com/v1")
    parser.add_argument("--llm-model", default="gpt-4")
    parser.add_argument("--out", default=".", help="output directory")


def _config(args) -> PromptConfig:
    cfg = PromptConfig(output_mode=args.output_mode,
                       gripper_mode=args.gripper_mode)
    for flag in getattr(args, "flag_off", None) or []:
        cfg = cfg.with_flag_off(flag)
    cfg.validate()
    return cfg


def _backend_factory(args):
    kind = args.backend
    if kind == "live":
        def factory(task_id, seed):
            return LiveBackend(args.llm_base_url, args.llm_model)
        return factory
    if args.transcript is None:
        raise SystemExit(f"--backend {kind} requires --transcript")
    path = Path(args.transcript)
    if kind == "replay":
        def factory(task_id, seed):
            if path.is_dir():
                return ReplayBackend(
                    Transcript.load(path / task_id / str(seed) / "transcript.json"))
            return ReplayBackend(Transcript.load(path))
        return factory

    doc = json.loads(path.read_text(encoding="utf-8"))
    responses = doc["responses"] if isinstance(doc, dict) else doc

    def factory(task_id, seed):
        return ScriptedBackend(list(responses))
    return factory


def _runner_factory(args):
    if args.output_mode != "code":
        return None
    if args.runner is None:
        raise SystemExit("code mode requires --runner PATH")

    def factory(task_id, seed):
        return SubprocessRunner(args.runner)
    return factory


def _cmd_run(args) -> int:
    task = load_task(args.task)
    cfg = _config(args)
    backend_factory = _backend_factory(args)
    runner_factory = _runner_factory(args)
    log_dir = os.path.join(args.out, "runs")
    outcome = run_trials(
        task, args.trials, args.seed, cfg,
        backend_factory=lambda seed: backend_factory(task.task_id, seed),
        runner_factory=(None if runner_factory is None
                        else (lambda seed: runner_factory(task.task_id, seed))),
        max_replans=args.max_replans, noise_sigma=args.noise_sigma,
        log_dir=log_dir,
    )
    for episode in outcome.episodes:
        print(f"seed {episode.seed}: checker="
              f"{'success' if episode.checker_verdict else 'failure'} "
              f"llm={'success' if episode.task_completed else 'failure'} "
              f"attempts={len(episode.attempts)} queries={episode.llm_queries}")
    print(f"{task.task_id}: {outcome.successes}/{outcome.trials} "
          f"(rate {outcome.rate:.2f}, executable {outcome.executable_pct:.0f}%, "
          f"agreement {outcome.llm_agreement:.2f})")
    print(f"episode logs under {log_dir}/{task.task_id}/<seed>/episode.jsonl")
    return 0


def _cmd_bench(args) -> int:
    ids = args.tasks.split(",") if args.tasks else task_ids()
    cfg = _config(args)
    table = run_benchmark(
        ids, cfg, backend_factory=_backend_factory(args), trials=args.trials,
        base_seed=args.seed, runner_factory=_runner_factory(args),
        max_replans=args.max_replans, noise_sigma=args.noise_sigma,
        log_dir=os.path.join(args.out, "runs"),
    )
    _write_outputs(table, args.out, "results")
    return 0


def _cmd_ablate(args) -> int:
    ids = args.tasks.split(",") if args.tasks else list(ABLATION_TASK_IDS)
    flags = args.flag_off or list(ABLATION_FLAGS)
    # --flag-off names the flags to ablate one at a time; the base stays full
    cfg = PromptConfig(output_mode=args.output_mode,
                       gripper_mode=args.gripper_mode)
    cfg.validate()
    backend_factory = _backend_factory(args)
    table = run_ablation(
        ids, cfg, flags,
        backend_factory=lambda variant, task_id, seed: backend_factory(task_id, seed),
        trials=args.trials, base_seed=args.seed,
        runner_factory=_runner_factory(args), max_replans=args.max_replans,
        noise_sigma=args.noise_sigma,
    )
    _write_outputs(table, args.out, "ablation")
    return 0


def _cmd_report(args) -> int:
    table = load_results_csv(Path(args.results).read_text(encoding="utf-8"))
    report = table.to_report()
    if args.out_file:
        Path(args.out_file).write_text(report, encoding="utf-8")
    print(report, end="")
    return 0


def _write_outputs(table, out_dir, stem):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = Path(out_dir) / f"{stem}.csv"
    report_path = Path(out_dir) / f"{stem}.txt"
    csv_path.write_text(table.to_csv(), encoding="utf-8")
    report_path.write_text(table.to_report(), encoding="utf-8")
    print(table.to_report(), end="")
    print(f"\nwrote {csv_path} and {report_path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajbench",
        description="Zero-shot trajectory-generation benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run trials of one task")
    run_p.add_argument("--task", required=True)
    run_p.add_argument("--flag-off", action="append", choices=ABLATION_FLAGS)
    _add_common(run_p)
    run_p.set_defaults(fn=_cmd_run)

    bench_p = sub.add_parser("bench", help="run the full task benchmark")
    bench_p.add_argument("--tasks", help="comma-separated task ids (default all)")
    _add_common(bench_p)
    bench_p.set_defaults(fn=_cmd_bench)

    ablate_p = sub.add_parser("ablate", help="one-flag-off prompt ablations")
    ablate_p.add_argument("--flag-off", action="append", choices=ABLATION_FLAGS,
                          help="repeatable; default: every flag")
    ablate_p.add_argument("--tasks", help="comma-separated task ids "
                          "(default: the ablation subset)")
    _add_common(ablate_p)
    ablate_p.set_defaults(fn=_cmd_ablate)

    report_p = sub.add_parser("report", help="re-render a results CSV")
    report_p.add_argument("--results", required=True)
    report_p.add_argument("--out-file")
    report_p.set_defaults(fn=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
