"""``phasemin`` command line: seeded experiments with CSV/JSON outputs.

Commands
--------
run            one trial; trajectory CSV (k, |c0|, error) + report JSON
phase-diagram  success-rate grid over (n, m) cells; grid CSV + summary JSON
fg-curve       expectation-gain curves; CSV + (optionally) certification JSON
lemma-check    probe battery; table to stdout, JSON results, exit status
dynamics       instrumented solves; coefficient-trace CSV + growth JSON

Option precedence: command-line flags override the --config JSON file,
which overrides built-in defaults; the effective configuration is echoed
into every JSON output. Outputs are byte-reproducible for a fixed config
and seed, independent of the worker count (``PHASEMIN_WORKERS``).

``--out`` takes a base path: ``--out results/exp1`` writes
``results/exp1.csv`` and ``results/exp1.json``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._backend import backend_name
from .altmin import SolveConfig, solve
from .dynamics import CoefficientTrace, first_crossing, tail_coefficient_stats
from .expectations import certify_constants, fg_curve
from .harness import (
    cell_summaries,
    run_grid,
    run_trial_report,
    trial_seeds,
    write_csv,
    write_json,
)
from .probes import run_all_probes
from .sensing import make_instance, random_unit_iterate

_DEFAULTS: dict[str, dict] = {
    "run": {
        "seed": 0,
        "n": 16,
        "m": 256,
        "trial": 0,
        "tol": 1e-7,
        "max_iter": 10_000,
        "stall_window": 500,
        "instrument": False,
        "out": "phasemin-run",
    },
    "phase-diagram": {
        "seed": 0,
        "n": [16, 32],
        "m": None,
        "ratios": [2, 4, 8, 16],
        "trials": 100,
        "tol": 1e-7,
        "max_iter": 10_000,
        "stall_window": 500,
        "out": "phasemin-phase-diagram",
    },
    "fg-curve": {
        "seed": 0,
        "grid_max": 0.95,
        "grid_step": 0.01,
        "samples": 100_000,
        "certify": False,
        "c0": 0.9,
        "cert_step": 0.005,
        "lipschitz": 2.0,
        "out": "phasemin-fg-curve",
    },
    "lemma-check": {
        "seed": 0,
        "trials_scale": 1.0,
        "out": None,
    },
    "dynamics": {
        "seed": 0,
        "n": [16, 32, 64],
        "m": None,
        "ratios": [16],
        "trials": 20,
        "tol": 1e-7,
        "max_iter": 10_000,
        "stall_window": 500,
        "depth": None,
        "growth_lo": 0.01,
        "growth_hi": 0.5,
        "basin": 0.9,
        "out": "phasemin-dynamics",
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasemin",
        description="Alternating-minimization phase retrieval experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=str, help="JSON file with option values")
        p.add_argument("--seed", type=int, help="master seed (default 0)")
        p.add_argument("--out", type=str, help="output base path")

    p = sub.add_parser("run", help="run a single seeded trial")
    add_common(p)
    p.add_argument("--n", type=int, help="signal dimension")
    p.add_argument("--m", type=int, help="measurement count")
    p.add_argument("--trial", type=int, help="trial index within the seed")
    p.add_argument("--tol", type=float, help="success tolerance")
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--stall-window", type=int, dest="stall_window")
    p.add_argument("--instrument", action="store_true", default=None,
                   help="also write a coefficient-trace CSV")

    p = sub.add_parser("phase-diagram", help="success-rate grid over (n, m)")
    add_common(p)
    p.add_argument("--n", type=int, nargs="+", help="signal dimensions")
    p.add_argument("--m", type=int, nargs="+",
                   help="explicit measurement counts (cartesian with --n)")
    p.add_argument("--ratios", type=int, nargs="+",
                   help="m/n ratios (used when --m is not given)")
    p.add_argument("--trials", type=int, help="trials per cell")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--stall-window", type=int, dest="stall_window")

    p = sub.add_parser("fg-curve", help="expectation-gain curves and certification")
    add_common(p)
    p.add_argument("--grid-max", type=float, dest="grid_max")
    p.add_argument("--grid-step", type=float, dest="grid_step")
    p.add_argument("--samples", type=int, help="Monte-Carlo samples per point")
    p.add_argument("--certify", action="store_true", default=None,
                   help="also run the constant certification")
    p.add_argument("--c0", type=float, help="certification upper end")
    p.add_argument("--cert-step", type=float, dest="cert_step")
    p.add_argument("--lipschitz", type=float, help="slope bound for certification")

    p = sub.add_parser("lemma-check", help="run the probe battery")
    add_common(p)
    p.add_argument("--trials-scale", type=float, dest="trials_scale",
                   help="scale every probe's trial count (smoke runs)")

    p = sub.add_parser("dynamics", help="instrumented solves and growth stats")
    add_common(p)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--m", type=int, nargs="+")
    p.add_argument("--ratios", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--stall-window", type=int, dest="stall_window")
    p.add_argument("--depth", type=int, help="basis depth override")
    p.add_argument("--growth-lo", type=float, dest="growth_lo")
    p.add_argument("--growth-hi", type=float, dest="growth_hi")
    p.add_argument("--basin", type=float, help="correlation threshold for escape")

    return parser


def _merge_options(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < explicit CLI flags."""
    opts = dict(_DEFAULTS[command])
    if getattr(args, "config", None):
        file_opts = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(file_opts) - set(opts)
        if unknown:
            raise SystemExit(f"unknown config keys for {command}: {sorted(unknown)}")
        opts.update(file_opts)
    for key in opts:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


def _out_base(opts: dict) -> Path:
    p = Path(opts["out"])
    return p.with_suffix("") if p.suffix in {".csv", ".json"} else p


def _cells(opts: dict) -> list[tuple[int, int]]:
    ns = [int(n) for n in opts["n"]]
    if opts["m"]:
        cells = [(n, int(m)) for n in ns for m in opts["m"]]
    else:
        cells = [(n, r * n) for n in ns for r in opts["ratios"]]
    return sorted(set(cells))


def _solve_config(opts: dict) -> SolveConfig:
    return SolveConfig(
        tol=opts["tol"], max_iter=opts["max_iter"], stall_window=opts["stall_window"]
    )


def cmd_run(opts: dict) -> int:
    base = _out_base(opts)
    cfg = _solve_config(opts)
    n, m, trial = opts["n"], opts["m"], opts["trial"]
    if opts["instrument"]:
        inst_seed, init_seed = trial_seeds(opts["seed"], n, m, trial)
        inst = make_instance(inst_seed, n, m)
        w1 = random_unit_iterate(np.random.default_rng(init_seed), inst)
        trace = CoefficientTrace(inst, keep_iterates=False)
        report = solve(inst, w1, cfg, observer=trace.observe)
        write_csv(
            base.parent / (base.name + "_trace.csv"),
            ["trial", "k", "i", "re_c", "im_c", "abs_c"],
            trace.csv_rows(trial),
        )
        record_seed = inst_seed
    else:
        record, report = run_trial_report(opts["seed"], n, m, trial, cfg)
        record_seed = record.seed
    write_csv(
        base.with_suffix(".csv"),
        ["k", "c0", "error"],
        (
            (k + 1, c, e)
            for k, (c, e) in enumerate(
                zip(report.correlation_trace, report.error_trace)
            )
        ),
    )
    write_json(
        base.with_suffix(".json"),
        {
            "config": opts,
            "backend": backend_name(),
            "instance": {"n": n, "m": m, "seed": record_seed},
            "report": report.to_dict(),
        },
    )
    return 0


def cmd_phase_diagram(opts: dict) -> int:
    base = _out_base(opts)
    records = run_grid(opts["seed"], _cells(opts), opts["trials"], _solve_config(opts))
    summaries = cell_summaries(records)
    write_csv(
        base.with_suffix(".csv"),
        ["n", "m", "trials", "successes", "success_rate", "median_iterations"],
        (
            (s["n"], s["m"], s["trials"], s["successes"], s["success_rate"], s["median_iterations"])
            for s in summaries
        ),
    )
    write_json(
        base.with_suffix(".json"),
        {"config": opts, "backend": backend_name(), "cells": summaries},
    )
    return 0


def cmd_fg_curve(opts: dict) -> int:
    base = _out_base(opts)
    steps = int(round(opts["grid_max"] / opts["grid_step"]))
    grid = [i * opts["grid_step"] for i in range(steps + 1)]
    grid = [c for c in grid if c < 1.0]
    points = fg_curve(grid, opts["samples"], opts["seed"])
    write_csv(
        base.with_suffix(".csv"),
        ["c", "f_hat", "f_stderr", "g_hat", "g_stderr", "ratio"],
        ((p.c, p.f_hat, p.f_stderr, p.g_hat, p.g_stderr, p.ratio) for p in points),
    )
    payload = {"config": opts, "n_points": len(points)}
    if opts["certify"]:
        report = certify_constants(
            opts["c0"],
            opts["cert_step"],
            opts["samples"],
            opts["seed"],
            lipschitz_bound=opts["lipschitz"],
        )
        payload["certification"] = report.to_dict()
    write_json(base.with_suffix(".json"), payload)
    return 0


def cmd_lemma_check(opts: dict) -> int:
    results = run_all_probes(opts["seed"], trials_scale=opts["trials_scale"])
    width = max(len(r.probe) for r in results)
    print(f"{'probe':<{width}}  {'trials':>9}  {'viol':>5}  {'rate':>10}  status")
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(
            f"{r.probe:<{width}}  {r.trials:>9}  {r.violations:>5}  "
            f"{r.empirical_rate:>10.3e}  {status}"
        )
    payload = {"config": opts, "results": [r.to_dict() for r in results]}
    if opts["out"]:
        write_json(_out_base(opts).with_suffix(".json"), payload)
    else:
        print(json.dumps(payload["results"], indent=2, sort_keys=True))
    return 0 if all(r.passed for r in results) else 1


def cmd_dynamics(opts: dict) -> int:
    base = _out_base(opts)
    cfg = _solve_config(opts)
    cells = _cells(opts)
    lo, hi = opts["growth_lo"], opts["growth_hi"]
    csv_rows: list[tuple] = []
    cell_stats = []
    warnings: list[str] = []
    trial_counter = 0
    for n, m in cells:
        ratios_in_window: list[float] = []
        escapes: list[int] = []
        traces = []
        for t in range(opts["trials"]):
            inst_seed, init_seed = trial_seeds(opts["seed"], n, m, t)
            inst = make_instance(inst_seed, n, m)
            w1 = random_unit_iterate(np.random.default_rng(init_seed), inst)
            trace = CoefficientTrace(inst, depth=opts["depth"], keep_iterates=False)
            solve(inst, w1, cfg, observer=trace.observe)
            cors = trace.correlation
            for a, b in zip(cors, cors[1:]):
                if lo < a < hi:
                    ratios_in_window.append(float(b / a))
            esc = first_crossing(cors, opts["basin"])
            if esc is not None:
                escapes.append(esc)
            if trace.saturated:
                warnings.append(f"basis saturated: n={n} m={m} trial={t}")
            csv_rows.extend(trace.csv_rows(trial_counter))
            traces.append(trace)
            trial_counter += 1
        ratios = np.asarray(ratios_in_window)
        cell_stats.append(
            {
                "n": n,
                "m": m,
                "trials": opts["trials"],
                "growth_ratios_in_window": len(ratios),
                "growth_p10": float(np.percentile(ratios, 10)) if len(ratios) else None,
                "growth_p50": float(np.percentile(ratios, 50)) if len(ratios) else None,
                "growth_p90": float(np.percentile(ratios, 90)) if len(ratios) else None,
                "median_escape_iteration": float(np.median(escapes)) if escapes else None,
                "escaped": len(escapes),
                "tail_coefficients": tail_coefficient_stats(traces),
            }
        )
    payload = {
        "config": opts,
        "backend": backend_name(),
        "cells": cell_stats,
        "warnings": warnings,
    }
    ratios_set = {m // n for n, m in cells}
    if len(ratios_set) == 1 and len(cells) >= 3:
        xs = np.log([c["n"] for c in cell_stats])
        ys = [c["median_escape_iteration"] for c in cell_stats]
        if all(y is not None for y in ys):
            slope, intercept = np.polyfit(xs, ys, 1)
            pred = slope * xs + intercept
            ss_res = float(np.sum((ys - pred) ** 2))
            ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
            payload["escape_scaling"] = {
                "slope_vs_log_n": float(slope),
                "intercept": float(intercept),
                "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else math.nan,
            }
    write_csv(
        base.with_suffix(".csv"),
        ["trial", "k", "i", "re_c", "im_c", "abs_c"],
        csv_rows,
    )
    write_json(base.with_suffix(".json"), payload)
    return 0


_COMMANDS = {
    "run": cmd_run,
    "phase-diagram": cmd_phase_diagram,
    "fg-curve": cmd_fg_curve,
    "lemma-check": cmd_lemma_check,
    "dynamics": cmd_dynamics,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    opts = _merge_options(args.command, args)
    return _COMMANDS[args.command](opts)


if __name__ == "__main__":
    sys.exit(main())
