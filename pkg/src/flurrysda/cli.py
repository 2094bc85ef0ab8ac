"""Command-line interface.

Subcommands:

* ``simulate``   generate a trace and its observed projection as CSV
* ``attack``     run the counting attack on an observed-log CSV
* ``bound``      print the theoretical bound table for a parameter grid
* ``experiment`` run a Monte Carlo sweep (CSV + JSON summary + figures)
* ``oracle``     exact small-case success probability, optionally vs MC
* ``report``     re-render figures for a finished experiment run

Exit codes: 0 on success, 1 on usage/config errors, 2 when an experiment
finds a cell whose empirical rate fails to dominate a positive bound.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import figures as figures_mod
from . import theory
from .attack import result_to_json, run_attack
from .epochs import epoch_samples_to_csv
from .errors import FlurrySdaError
from .experiment import run_experiment, wilson_interval
from .observer import observe, observed_log_from_csv, observed_log_to_csv
from .oracle import brute_force_oracle
from .traffic import generate_trace, trace_to_csv


def _parse_int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _parse_float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _cmd_simulate(args: argparse.Namespace) -> int:
    data = cfgmod.load_config(args.config)
    spec = cfgmod.population_from_dict(data["population"])
    tcfg = cfgmod.trace_config_from_dict(data["trace"])
    rng = np.random.default_rng(args.seed)
    trace = generate_trace(spec, tcfg, rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / "trace.csv"
    observed_path = out / "observed.csv"
    trace_to_csv(trace, trace_path)
    observed_log_to_csv(observe(trace), observed_path)
    print(
        f"wrote {len(trace)} events ({len(trace.send_times)} group sends) "
        f"to {trace_path} and {observed_path}"
    )
    return 0


def _cmd_attack(args: argparse.Namespace) -> int:
    data = cfgmod.load_config(args.config)
    bob, m, acfg = cfgmod.attack_config_from_dict(data["attack"])
    log = observed_log_from_csv(args.log, horizon=args.horizon)
    rng = np.random.default_rng(args.seed)
    samples: list = []
    result = run_attack(log, bob, m, acfg, rng, samples_out=samples)
    echo = {
        "bob": bob, "m": m, "n": acfg.n, "k_hat": acfg.k_hat,
        "epoch_length": acfg.epoch_length,
        "gap_max": acfg.flurry.gap_max, "min_size": acfg.flurry.min_size,
        "seed": args.seed, "log": str(args.log),
    }
    if args.dump_epochs:
        epoch_samples_to_csv(samples, args.dump_epochs)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "attack_result.json"
        result_to_json(result, echo, path)
        print(f"top-{acfg.k_hat}: {result.top_k}  (result written to {path})")
    else:
        print(result_to_json(result, echo))
    return 0


def _cmd_bound(args: argparse.Namespace) -> int:
    if args.config:
        data = cfgmod.load_config(args.config)
        grid = data["bound"]
        ms = [int(v) for v in grid["m"]]
        ks = [int(v) for v in grid["k"]]
        trs = [(float(t), float(r)) for t, r in grid["t_r"]]
        ns = [int(v) for v in grid.get("n", [])]
        confs = [float(v) for v in grid.get("confidence", [])]
    else:
        ms, ks = args.m, args.k
        trs = list(zip(args.t, args.r))
        ns = args.n or []
        confs = args.confidence or []

    rows = []
    for m in ms:
        for k in ks:
            for t, r in trs:
                probs = ((t, r),) * k
                all_ns = sorted(set(ns) | {theory.n_min(m, probs, c) for c in confs})
                rows.extend(theory.bound_table([m], [k], [(t, r)], all_ns))

    sink = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(sink)
        w.writerow(["m", "k", "t", "r", "n", "C", "bound"])
        for m, k, t, r, n, c_val, b in rows:
            w.writerow([m, k, repr(t), repr(r), n, repr(c_val), repr(b)])
    finally:
        if args.out:
            sink.close()
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    data = cfgmod.load_config(args.config)
    plan = cfgmod.plan_from_dict(data["experiment"])
    if args.seed is not None:
        plan.base_seed = args.seed
    if args.mode is not None:
        plan.mode = args.mode
    if args.trials is not None:
        plan.trials = args.trials
    plan.validate()
    report = run_experiment(
        plan,
        args.out,
        render_figures=not args.no_figures,
        log=lambda msg: print(msg, file=sys.stderr),
    )
    n_fail = sum(not s.passed for s in report.summaries)
    print(
        f"{len(report.summaries)} cells, {n_fail} bound-dominance failures; "
        f"results in {report.trials_csv.parent}"
    )
    return report.exit_code


def _cmd_oracle(args: argparse.Namespace) -> int:
    if args.config:
        data = cfgmod.load_config(args.config)
        spec = cfgmod.population_from_dict(data["population"])
        n = int(data.get("oracle", {}).get("n", args.n or 1))
    else:
        from .traffic import PopulationSpec

        spec = PopulationSpec.uniform(args.m, args.k, t=args.t, r=args.r, force=args.force)
        n = args.n
    exact = brute_force_oracle(spec, n)
    print(f"exact success probability: {exact!r}")
    if args.trials:
        from .experiment import run_ideal_trial

        rng = np.random.default_rng(args.seed)
        hits = sum(run_ideal_trial(spec, n, rng).success for _ in range(args.trials))
        rate = hits / args.trials
        low, high = wilson_interval(hits, args.trials)
        print(
            f"monte carlo ({args.trials} trials): {rate:.6f} "
            f"[{low:.6f}, {high:.6f}], |diff| = {abs(rate - exact):.6f}"
        )
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    summary_path = run_dir / "summary.json"
    with open(summary_path) as f:
        summary = json.load(f)
    paths = figures_mod.render_run(run_dir, summary["cells"])
    print(f"rendered {len(paths)} figures under {run_dir / 'figures'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flurrysda",
        description="Sealed-sender group traffic simulator and counting-attack harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a trace and its observed CSV")
    p.add_argument("--config", required=True, help="YAML with population + trace sections")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("attack", help="run the attack on an observed-log CSV")
    p.add_argument("--log", required=True, help="observed log CSV (timestamp,recipient)")
    p.add_argument("--config", required=True, help="YAML with an attack section")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=None,
                   help="log horizon in seconds (default: last timestamp)")
    p.add_argument("--out", default=None, help="directory for attack_result.json")
    p.add_argument("--dump-epochs", default=None, help="CSV path for the epoch samples used")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("bound", help="print the theoretical bound table as CSV")
    p.add_argument("--config", default=None, help="YAML with a bound section")
    p.add_argument("--m", type=_parse_int_list, default=[100])
    p.add_argument("--k", type=_parse_int_list, default=[3])
    p.add_argument("--t", type=_parse_float_list, default=[1.0])
    p.add_argument("--r", type=_parse_float_list, default=[0.1])
    p.add_argument("--n", type=_parse_int_list, default=None)
    p.add_argument("--confidence", type=_parse_float_list, default=None,
                   help="also include n_min for these confidence targets")
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("experiment", help="run a Monte Carlo sweep")
    p.add_argument("--config", required=True, help="YAML with an experiment section")
    p.add_argument("--seed", type=int, default=None, help="override base_seed")
    p.add_argument("--mode", choices=["ideal", "trace"], default=None)
    p.add_argument("--trials", type=int, default=None, help="override trials per cell")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("oracle", help="exact small-case success probability")
    p.add_argument("--config", default=None, help="YAML with a population section")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--force", action="store_true",
                   help="skip the t > r structure check (oracle edge cases)")
    p.add_argument("--trials", type=int, default=None,
                   help="also run this many Monte Carlo trials and compare")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("report", help="re-render figures for a finished run")
    p.add_argument("--run", required=True, help="experiment output directory")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FlurrySdaError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
