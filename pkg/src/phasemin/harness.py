"""Trial orchestration: seeded trials, parallel grids, deterministic IO.

Seeding scheme: every trial's instance and initial iterate get their own
64-bit seeds derived from ``(master_seed, purpose_tag, n, m, trial)``, so
a record is a pure function of ``(master_seed, n, m, trial)`` - immune to
execution order and worker count. Aggregation sorts by cell, so output
files are byte-identical however the work was scheduled.

Worker count comes from the ``PHASEMIN_WORKERS`` environment variable
only (default 1 = in-process); it is scheduling, not science.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .altmin import SolveConfig, SolveReport, solve
from .sensing import make_instance, random_unit_iterate, spawn_seed

__all__ = [
    "TAG_INSTANCE",
    "TAG_INIT",
    "ExperimentRecord",
    "worker_count",
    "trial_seeds",
    "run_trial",
    "run_cell",
    "run_grid",
    "cell_summaries",
    "write_csv",
    "write_json",
]

# Purpose tags for seed derivation; distinct tags give independent streams
# for the same (n, m, trial) coordinates.
TAG_INSTANCE = 0x01
TAG_INIT = 0x02


@dataclass(frozen=True)
class ExperimentRecord:
    """One trial's outcome; fully determined by (master_seed, n, m, trial)."""

    n: int
    m: int
    trial_index: int
    seed: int
    success: bool
    final_error: float
    iterations: int
    stop_reason: str

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "trial_index": self.trial_index,
            "seed": self.seed,
            "success": bool(self.success),
            "final_error": float(self.final_error),
            "iterations": int(self.iterations),
            "stop_reason": self.stop_reason,
        }


def worker_count() -> int:
    raw = os.environ.get("PHASEMIN_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def trial_seeds(master_seed: int, n: int, m: int, trial_index: int) -> tuple[int, int]:
    """(instance_seed, init_seed) for one trial."""
    return (
        spawn_seed(master_seed, TAG_INSTANCE, n, m, trial_index),
        spawn_seed(master_seed, TAG_INIT, n, m, trial_index),
    )


def run_trial(
    master_seed: int, n: int, m: int, trial_index: int, cfg: SolveConfig
) -> ExperimentRecord:
    record, _ = run_trial_report(master_seed, n, m, trial_index, cfg)
    return record


def run_trial_report(
    master_seed: int, n: int, m: int, trial_index: int, cfg: SolveConfig
) -> tuple[ExperimentRecord, SolveReport]:
    """Run one seeded trial and return both the record and the full report."""
    inst_seed, init_seed = trial_seeds(master_seed, n, m, trial_index)
    inst = make_instance(inst_seed, n, m)
    w1 = random_unit_iterate(np.random.default_rng(init_seed), inst)
    report = solve(inst, w1, cfg)
    record = ExperimentRecord(
        n=n,
        m=m,
        trial_index=trial_index,
        seed=inst_seed,
        success=report.success,
        final_error=report.final_error,
        iterations=report.iterations,
        stop_reason=report.stop_reason,
    )
    return record, report


def run_cell(
    master_seed: int, n: int, m: int, trials: int, cfg: SolveConfig
) -> list[ExperimentRecord]:
    return [run_trial(master_seed, n, m, t, cfg) for t in range(trials)]


def _cell_task(args) -> list[ExperimentRecord]:
    return run_cell(*args)


def run_grid(
    master_seed: int,
    cells: list[tuple[int, int]],
    trials: int,
    cfg: SolveConfig,
) -> list[ExperimentRecord]:
    """Run ``trials`` seeded trials for every (n, m) cell.

    Cells are processed sorted by (n, m); with ``PHASEMIN_WORKERS > 1``
    they are distributed over a process pool. Results are identical
    either way.
    """
    cells = sorted(set((int(n), int(m)) for n, m in cells))
    for n, m in cells:
        if not 1 <= n < m:
            raise ValueError(f"every cell needs 1 <= n < m, got (n={n}, m={m})")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks = [(master_seed, n, m, trials, cfg) for n, m in cells]
    workers = worker_count()
    if workers == 1 or len(tasks) == 1:
        chunks = [_cell_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            chunks = list(pool.map(_cell_task, tasks))
    return [rec for chunk in chunks for rec in chunk]


def cell_summaries(records: list[ExperimentRecord]) -> list[dict]:
    """Per-cell aggregates, sorted by (n, m)."""
    by_cell: dict[tuple[int, int], list[ExperimentRecord]] = {}
    for rec in records:
        by_cell.setdefault((rec.n, rec.m), []).append(rec)
    out = []
    for (n, m) in sorted(by_cell):
        recs = by_cell[(n, m)]
        successes = sum(r.success for r in recs)
        out.append(
            {
                "n": n,
                "m": m,
                "trials": len(recs),
                "successes": successes,
                "success_rate": successes / len(recs),
                "median_iterations": float(np.median([r.iterations for r in recs])),
            }
        )
    return out


def _fmt_cell(v) -> str:
    """CSV cell: floats in shortest round-trip decimal, the rest as str."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header: list[str], rows) -> None:
    """UTF-8 CSV, header row, LF line endings, round-trip float format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(_fmt_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
