"""Benchmark and ablation runners plus report generation.

Success rates always come from the ground-truth checkers; the model's own
verdicts are reported as an agreement rate. The headline external reference
for a full-prompt mean on real hardware is 57.3%, which is NOT reproducible
here (closed, stochastic models; simulated world) and is only echoed in the
report footer for context.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .catalog import load_task
from .orchestrator import DEFAULT_MAX_REPLANS, DEFAULT_TRIALS, run_trials
from .prompts import ABLATION_FLAGS, ConfigError, PromptConfig

REFERENCE_FULL_PROMPT_MEAN_PCT = 57.3  # external reference; see module docstring

CSV_HEADER = ["task", "variant", "trials", "successes", "rate", "executable_pct"]


@dataclass
class ResultRow:
    task: str
    variant: str
    trials: int
    successes: int
    rate: float
    executable_pct: float
    corrections_mean: float
    llm_agreement: float


@dataclass
class ResultsTable:
    rows: list[ResultRow]

    def variants(self) -> list[str]:
        seen = []
        for row in self.rows:
            if row.variant not in seen:
                seen.append(row.variant)
        return seen

    def mean_rate(self, variant: str) -> float | None:
        rates = [r.rate for r in self.rows if r.variant == variant]
        return sum(rates) / len(rates) if rates else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([row.task, row.variant, row.trials, row.successes,
                             f"{row.rate:.4f}", f"{row.executable_pct:.1f}"])
        for variant in self.variants():
            mean = self.mean_rate(variant)
            total = sum(r.trials for r in self.rows if r.variant == variant)
            wins = sum(r.successes for r in self.rows if r.variant == variant)
            writer.writerow(["mean", variant, total, wins,
                             f"{mean:.4f}" if mean is not None else "n/a", ""])
        return buf.getvalue()

    def to_report(self) -> str:
        lines = []
        width = max([len(r.task) for r in self.rows] + [len("task")], default=4)
        header = (f"{'task':<{width}}  {'variant':<24}  {'trials':>6}  "
                  f"{'succ':>4}  {'rate':>6}  {'exec%':>6}  {'corr':>5}  {'agree':>5}")
        lines.append(header)
        lines.append("-" * len(header))
        for row in self.rows:
            lines.append(
                f"{row.task:<{width}}  {row.variant:<24}  {row.trials:>6}  "
                f"{row.successes:>4}  {row.rate:>6.2f}  {row.executable_pct:>6.1f}  "
                f"{row.corrections_mean:>5.2f}  {row.llm_agreement:>5.2f}"
            )
        lines.append("-" * len(header))
        if not self.rows:
            lines.append("mean success rate: undefined (no tasks)")
        for variant in self.variants():
            mean = self.mean_rate(variant)
            mean_text = f"{mean:.3f}" if mean is not None else "undefined (no tasks)"
            lines.append(f"mean success rate [{variant}]: {mean_text}")
        lines.append("")
        lines.append(
            f"reference: full-prompt mean of {REFERENCE_FULL_PROMPT_MEAN_PCT}% "
            "reported on real hardware with a closed-source model; not "
            "reproducible with this simulator's backends and stated here for "
            "context only."
        )
        return "\n".join(lines) + "\n"


def _trial_row(task_id, variant, outcome) -> ResultRow:
    return ResultRow(
        task=task_id, variant=variant, trials=outcome.trials,
        successes=outcome.successes, rate=outcome.rate,
        executable_pct=outcome.executable_pct,
        corrections_mean=outcome.corrections_mean,
        llm_agreement=outcome.llm_agreement,
    )


def run_benchmark(task_ids, cfg: PromptConfig, backend_factory,
                  trials: int = DEFAULT_TRIALS, base_seed: int = 0,
                  runner_factory=None, max_replans: int = DEFAULT_MAX_REPLANS,
                  noise_sigma: float = 0.0, log_dir: str | None = None,
                  variant: str = "full") -> ResultsTable:
    """Per-task success rates for one prompt configuration.

    backend_factory(task_id, seed) builds a fresh backend per episode;
    runner_factory(task_id, seed) likewise when running code mode.
    """
    rows = []
    for task_id in task_ids:
        task = load_task(task_id)
        outcome = run_trials(
            task, trials, base_seed, cfg,
            backend_factory=lambda seed, t=task_id: backend_factory(t, seed),
            runner_factory=(
                None if runner_factory is None
                else (lambda seed, t=task_id: runner_factory(t, seed))
            ),
            max_replans=max_replans, noise_sigma=noise_sigma, log_dir=log_dir,
        )
        rows.append(_trial_row(task_id, variant, outcome))
    return ResultsTable(rows)


def ablation_variants(base_cfg: PromptConfig, flags_off) -> list[tuple[str, PromptConfig]]:
    """The base plus one variant per named flag, each differing from the base
    in exactly that flag."""
    variants = [("full", base_cfg)]
    for flag in flags_off:
        if flag not in ABLATION_FLAGS:
            raise ConfigError(f"unknown ablation flag {flag!r}")
        cfg = base_cfg.with_flag_off(flag)
        if cfg == base_cfg:
            raise ConfigError(f"variant {flag!r} is identical to the base "
                              "(flag already off)")
        variants.append((f"no_{flag}", cfg))
    return variants


def run_ablation(task_ids, base_cfg: PromptConfig, flags_off, backend_factory,
                 trials: int = DEFAULT_TRIALS, base_seed: int = 0,
                 runner_factory=None, max_replans: int = DEFAULT_MAX_REPLANS,
                 noise_sigma: float = 0.0) -> ResultsTable:
    """One column per variant (base first), on the given task subset.

    backend_factory(variant_name, task_id, seed) -> backend.
    """
    rows = []
    for variant_name, cfg in ablation_variants(base_cfg, flags_off):
        table = run_benchmark(
            task_ids, cfg,
            backend_factory=lambda t, s, v=variant_name: backend_factory(v, t, s),
            trials=trials, base_seed=base_seed,
            runner_factory=runner_factory, max_replans=max_replans,
            noise_sigma=noise_sigma, variant=variant_name,
        )
        rows.extend(table.rows)
    return ResultsTable(rows)


def run_backend_comparison(task_ids, cfg: PromptConfig, backends: dict,
                           trials: int = DEFAULT_TRIALS, base_seed: int = 0,
                           runner_factory=None,
                           max_replans: int = DEFAULT_MAX_REPLANS) -> ResultsTable:
    """Same prompt, different model backends: one variant per backend name.

    backends maps name -> factory(task_id, seed).
    """
    if not backends:
        raise ConfigError("backend comparison needs at least one backend")
    rows = []
    for name, factory in backends.items():
        table = run_benchmark(
            task_ids, cfg, backend_factory=factory, trials=trials,
            base_seed=base_seed, runner_factory=runner_factory,
            max_replans=max_replans, variant=name,
        )
        rows.extend(table.rows)
    return ResultsTable(rows)


def load_results_csv(text: str) -> ResultsTable:
    """Rebuild a table from its CSV (mean rows are skipped; report-only
    columns default to zero)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected results header: {header}")
    rows = []
    for rec in reader:
        if rec[0] == "mean":
            continue
        rows.append(ResultRow(
            task=rec[0], variant=rec[1], trials=int(rec[2]),
            successes=int(rec[3]), rate=float(rec[4]),
            executable_pct=float(rec[5]) if rec[5] else 0.0,
            corrections_mean=0.0, llm_agreement=0.0,
        ))
    return ResultsTable(rows)
