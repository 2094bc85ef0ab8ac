"""Monte Carlo experiment harness.

Runs grids of attack trials in two modes.  Ideal mode draws epochs straight
from the per-epoch Bernoulli model (no flurry detection involved), which
isolates validation of the success bound from detector noise.  Trace mode
exercises the whole pipeline: generate a trace, project it to the server's
view, detect flurries, run the attack.

Every trial owns an independent generator seeded by a stable 64-bit hash of
(base_seed, cell_index, trial_index), so results do not depend on execution
order and a plan replays byte-for-byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import theory
from .attack import AttackConfig, run_attack
from .epochs import TARGET, FlurryParams, detect_flurries
from .errors import PlanInvalid
from .observer import observe
from .traffic import PopulationSpec, TraceConfig, generate_trace

MODE_IDEAL = "ideal"
MODE_TRACE = "trace"

TRIALS_CSV_HEADER = [
    "m", "k", "t", "r", "n", "trial", "seed", "success", "min_member", "max_nonmember",
]

# Exact 97.5% standard-normal quantile, for two-sided 95% Wilson intervals.
_WILSON_Z = 1.959963984540054


def trial_seed(base_seed: int, cell_index: int, trial_index: int) -> int:
    """Stable 64-bit per-trial seed: SHA-256 of the identifying triple."""
    payload = f"flurrysda:{base_seed}:{cell_index}:{trial_index}".encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def ideal_counts(spec: PopulationSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Count table after n ideal pairs, vectorized over epochs.

    Row 2p of the uniform block is pair p's target epoch, row 2p+1 its
    random epoch, so the stream matches n alternating draw_ideal_epoch
    calls exactly and the result is bit-identical to feeding those draws
    through process_pair.  Returns counts for all user ids; the entry at
    Bob's id is meaningless and must be ignored.
    """
    u = rng.random((2 * n, spec.total_users))
    target_hits = u[0::2] < spec.t_array
    random_hits = u[1::2] < spec.r_array
    return (
        target_hits.sum(axis=0, dtype=np.int64)
        - random_hits.sum(axis=0, dtype=np.int64)
    )


def ideal_success_rate(
    spec: PopulationSpec,
    n: int,
    trials: int,
    rng: np.random.Generator,
    max_block_doubles: int = 4_000_000,
) -> float:
    """Success rate over many ideal trials sharing one generator.

    Trials are evaluated in vectorized blocks; the uniform stream is
    consumed exactly as ``trials`` consecutive run_ideal_trial calls on
    the same generator would consume it, so results match that loop
    bit-for-bit.
    """
    per_trial = 2 * n * spec.total_users
    chunk = max(1, min(trials, max_block_doubles // per_trial))
    members = np.fromiter(spec.group, dtype=np.int64)
    mask = np.ones(spec.total_users, dtype=bool)
    mask[members] = False
    mask[spec.bob] = False
    successes = 0
    done = 0
    while done < trials:
        block = min(chunk, trials - done)
        u = rng.random((block, 2 * n, spec.total_users))
        target = (u[:, 0::2, :] < spec.t_array).sum(axis=1, dtype=np.int64)
        random_ = (u[:, 1::2, :] < spec.r_array).sum(axis=1, dtype=np.int64)
        counts = target - random_
        min_member = counts[:, members].min(axis=1)
        max_other = counts[:, mask].max(axis=1)
        successes += int((min_member > max_other).sum())
        done += block
    return successes / trials


@dataclass
class TrialOutcome:
    success: bool
    pairs_processed: int
    min_member: int
    max_nonmember: int
    flurries_detected: int | None = None
    flurry_recall: float | None = None
    flurry_precision: float | None = None
    multi_send_windows: int | None = None


def _split_counts(
    counts_by_user: dict[int, int], spec: PopulationSpec
) -> tuple[int, int, bool]:
    members = [counts_by_user[u] for u in spec.group]
    others = [c for u, c in counts_by_user.items() if u not in spec.group]
    min_member = min(members)
    max_nonmember = max(others)
    return min_member, max_nonmember, min_member > max_nonmember


def run_ideal_trial(spec: PopulationSpec, n: int, rng: np.random.Generator) -> TrialOutcome:
    """One ideal-mode attack trial: n pairs, then the strict ranking test."""
    counts = ideal_counts(spec, n, rng)
    members = np.fromiter(spec.group, dtype=np.int64)
    mask = np.ones(spec.total_users, dtype=bool)
    mask[members] = False
    mask[spec.bob] = False
    min_member = int(counts[members].min())
    max_nonmember = int(counts[mask].max())
    return TrialOutcome(
        success=min_member > max_nonmember,
        pairs_processed=n,
        min_member=min_member,
        max_nonmember=max_nonmember,
    )


@dataclass
class TraceSettings:
    """Trace-mode mechanics shared by every cell of a plan."""

    epoch_length: float = 60.0
    receipt_min: float = 0.1
    receipt_max: float = 2.0
    jitter_max: float = 0.0
    send_spacing: float = 300.0
    gap_max: float = 2.5

    def __post_init__(self) -> None:
        if self.send_spacing <= 0:
            raise PlanInvalid(f"send_spacing must be positive, got {self.send_spacing}")


def _match_flurries(
    detected: list[float], send_times: np.ndarray, settings: TraceSettings
) -> tuple[float, float]:
    """(recall, precision) of detected flurry starts against true sends.

    A detection matches a send if it starts within the receipt window after
    it (allowing a few background events to have pulled the run start
    slightly earlier).
    """
    if len(send_times) == 0:
        return (1.0, 0.0 if detected else 1.0)
    lo_slack = 3 * settings.gap_max
    hi_slack = settings.receipt_max + settings.jitter_max
    det = np.asarray(detected, dtype=np.float64)
    matched_sends = 0
    for s in send_times:
        if len(det) and np.any((det >= s - lo_slack) & (det <= s + hi_slack)):
            matched_sends += 1
    recall = matched_sends / len(send_times)
    if len(det) == 0:
        return recall, 1.0
    matched_det = 0
    for f in det:
        if np.any((send_times >= f - hi_slack) & (send_times <= f + lo_slack)):
            matched_det += 1
    return recall, matched_det / len(det)


def build_trace_config(n_sends: int, settings: TraceSettings) -> TraceConfig:
    """Evenly spaced forced sends, first one a full epoch in."""
    start = settings.epoch_length
    send_times = [start + i * settings.send_spacing for i in range(n_sends)]
    horizon = send_times[-1] + settings.receipt_max + settings.jitter_max + 1.0
    return TraceConfig(
        horizon=horizon,
        epoch_length=settings.epoch_length,
        send_times=send_times,
        receipt_min=settings.receipt_min,
        receipt_max=settings.receipt_max,
        jitter_max=settings.jitter_max,
    )


def run_trace_trial(
    spec: PopulationSpec,
    n: int,
    settings: TraceSettings,
    rng: np.random.Generator,
) -> TrialOutcome:
    """One full-pipeline trial: trace -> observation -> detection -> attack."""
    tcfg = build_trace_config(n, settings)
    trace = generate_trace(spec, tcfg, rng)
    log = observe(trace)
    acfg = AttackConfig(
        n=n,
        k_hat=spec.k,
        epoch_length=settings.epoch_length,
        flurry=FlurryParams.for_group_size(spec.k, gap_max=settings.gap_max),
    )
    samples: list = []
    result = run_attack(
        log, spec.bob, spec.total_users, acfg, rng,
        true_group=spec.group, samples_out=samples,
    )
    min_member, max_nonmember, _ = _split_counts(result.table.counts, spec)
    detected = detect_flurries(log, spec.bob, acfg.flurry)
    recall, precision = _match_flurries(detected, trace.send_times, settings)
    multi = 0
    for s in samples:
        if s.label == TARGET:
            inside = np.sum(
                (trace.send_times >= s.window[0]) & (trace.send_times < s.window[1])
            )
            if inside > 1:
                multi += 1
    return TrialOutcome(
        success=bool(result.success),
        pairs_processed=result.table.pairs_processed,
        min_member=min_member,
        max_nonmember=max_nonmember,
        flurries_detected=result.flurries_detected,
        flurry_recall=recall,
        flurry_precision=precision,
        multi_send_windows=multi,
    )


@dataclass(frozen=True)
class Cell:
    index: int
    m: int
    k: int
    t: float
    r: float
    n: int


@dataclass
class ExperimentPlan:
    """A parameter sweep: grid axes, trials per cell, and the base seed.

    ``n_values`` gives explicit pair counts; ``confidences`` adds, per
    cell, the minimum n whose theoretical bound reaches each confidence.
    """

    mode: str
    m_values: list[int]
    k_values: list[int]
    tr_pairs: list[tuple[float, float]]
    n_values: list[int] = field(default_factory=list)
    confidences: list[float] = field(default_factory=list)
    trials: int = 100
    base_seed: int = 0
    trace: TraceSettings = field(default_factory=TraceSettings)

    def validate(self) -> None:
        if self.mode not in (MODE_IDEAL, MODE_TRACE):
            raise PlanInvalid(f"mode must be '{MODE_IDEAL}' or '{MODE_TRACE}', got {self.mode!r}")
        if not self.m_values or not self.k_values or not self.tr_pairs:
            raise PlanInvalid("grid must list at least one m, k and (t, r) value")
        if not self.n_values and not self.confidences:
            raise PlanInvalid("grid needs explicit n values or confidence targets")
        if self.trials < 1:
            raise PlanInvalid(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.base_seed < 2**64:
            raise PlanInvalid("base_seed must be an unsigned 64-bit integer")
        for n in self.n_values:
            if n < 1:
                raise PlanInvalid(f"n values must be >= 1, got {n}")
        for c in self.confidences:
            if not 0.0 < c < 1.0:
                raise PlanInvalid(f"confidence targets must lie in (0, 1), got {c}")
        for t, r in self.tr_pairs:
            if not (0.0 <= r <= 1.0 and 0.0 <= t <= 1.0):
                raise PlanInvalid(f"probabilities must lie in [0, 1], got (t={t}, r={r})")
            if t <= r:
                raise PlanInvalid(f"group members need t > r, got (t={t}, r={r})")
            if self.mode == MODE_TRACE and t != 1.0:
                raise PlanInvalid(
                    "trace mode forces t = 1 (every member receives each group send); "
                    f"got t={t}"
                )
        for m in self.m_values:
            for k in self.k_values:
                if k < 1:
                    raise PlanInvalid(f"k must be >= 1, got {k}")
                if m < k + 2:
                    raise PlanInvalid(
                        f"cell m={m}, k={k} leaves no non-member to rank against"
                    )

    def cells(self) -> list[Cell]:
        """Deterministic cell expansion; indices feed the seed derivation."""
        self.validate()
        out: list[Cell] = []
        idx = 0
        for m in self.m_values:
            for k in self.k_values:
                for t, r in self.tr_pairs:
                    ns = set(self.n_values)
                    for c in self.confidences:
                        ns.add(theory.n_min(m, ((t, r),) * k, c))
                    for n in sorted(ns):
                        out.append(Cell(index=idx, m=m, k=k, t=t, r=r, n=n))
                        idx += 1
        return out


@dataclass
class CellSummary:
    cell: Cell
    trials: int
    successes: int
    rate: float
    wilson_low: float
    wilson_high: float
    C: float
    bound: float
    passed: bool
    mean_pairs: float
    mean_flurry_recall: float | None = None
    mean_flurry_precision: float | None = None
    multi_send_windows: int | None = None

    def to_dict(self) -> dict:
        d = {
            "m": self.cell.m,
            "k": self.cell.k,
            "t": self.cell.t,
            "r": self.cell.r,
            "n": self.cell.n,
            "cell_index": self.cell.index,
            "trials": self.trials,
            "successes": self.successes,
            "rate": self.rate,
            "wilson_low": self.wilson_low,
            "wilson_high": self.wilson_high,
            "C": self.C,
            "bound": self.bound,
            "bound_clamped": min(1.0, max(0.0, self.bound)),
            "pass": self.passed,
            "mean_pairs": self.mean_pairs,
        }
        if self.mean_flurry_recall is not None:
            d["mean_flurry_recall"] = self.mean_flurry_recall
            d["mean_flurry_precision"] = self.mean_flurry_precision
            d["multi_send_windows"] = self.multi_send_windows
        return d


@dataclass
class ExperimentReport:
    summaries: list[CellSummary]
    all_pass: bool
    trials_csv: Path
    summary_json: Path
    figures: list[Path]

    @property
    def exit_code(self) -> int:
        return 0 if self.all_pass else 2


def _run_cell_trial(
    plan: ExperimentPlan, cell: Cell, trial: int
) -> tuple[int, TrialOutcome]:
    seed = trial_seed(plan.base_seed, cell.index, trial)
    rng = np.random.default_rng(seed)
    spec = PopulationSpec.uniform(cell.m, cell.k, t=cell.t, r=cell.r)
    if plan.mode == MODE_IDEAL:
        outcome = run_ideal_trial(spec, cell.n, rng)
    else:
        outcome = run_trace_trial(spec, cell.n, plan.trace, rng)
    return seed, outcome


def run_experiment(
    plan: ExperimentPlan,
    out_dir: Path | str,
    render_figures: bool = True,
    log: Callable[[str], None] | None = None,
) -> ExperimentReport:
    """Execute a plan, streaming trial rows to CSV and summarizing per cell.

    A cell passes when its theoretical bound is non-positive (vacuous) or
    the Wilson lower limit of the empirical success rate reaches the bound.
    Rows are flushed after every cell so an interrupted run keeps its
    partial results.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = plan.cells()
    trials_path = out_dir / "trials.csv"
    summaries: list[CellSummary] = []

    with open(trials_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRIALS_CSV_HEADER)
        for cell in cells:
            successes = 0
            pairs_total = 0
            recalls: list[float] = []
            precisions: list[float] = []
            multi_total = 0
            for trial in range(plan.trials):
                seed, outcome = _run_cell_trial(plan, cell, trial)
                successes += outcome.success
                pairs_total += outcome.pairs_processed
                if outcome.flurry_recall is not None:
                    recalls.append(outcome.flurry_recall)
                    precisions.append(outcome.flurry_precision or 0.0)
                    multi_total += outcome.multi_send_windows or 0
                writer.writerow([
                    cell.m, cell.k, repr(cell.t), repr(cell.r), cell.n,
                    trial, seed, int(outcome.success),
                    outcome.min_member, outcome.max_nonmember,
                ])
            f.flush()
            probs = ((cell.t, cell.r),) * cell.k
            c_val = theory.compute_C(probs)
            b = theory.bound(theory.BoundInputs(m=cell.m, group_probs=probs, n=cell.n))
            low, high = wilson_interval(successes, plan.trials)
            rate = successes / plan.trials
            passed = b <= 0.0 or low >= b
            summaries.append(CellSummary(
                cell=cell,
                trials=plan.trials,
                successes=successes,
                rate=rate,
                wilson_low=low,
                wilson_high=high,
                C=c_val,
                bound=b,
                passed=passed,
                mean_pairs=pairs_total / plan.trials,
                mean_flurry_recall=(sum(recalls) / len(recalls)) if recalls else None,
                mean_flurry_precision=(sum(precisions) / len(precisions)) if precisions else None,
                multi_send_windows=multi_total if recalls else None,
            ))
            if log:
                log(
                    f"cell {cell.index}: m={cell.m} k={cell.k} t={cell.t} r={cell.r} "
                    f"n={cell.n} rate={rate:.4f} bound={b:.4f} "
                    f"{'pass' if passed else 'FAIL'}"
                )

    all_pass = all(s.passed for s in summaries)
    figures: list[Path] = []
    if render_figures:
        from . import figures as figures_mod

        figures = figures_mod.render_run(out_dir, [s.to_dict() for s in summaries])

    summary = {
        "mode": plan.mode,
        "base_seed": plan.base_seed,
        "trials_per_cell": plan.trials,
        "all_pass": all_pass,
        "cells": [s.to_dict() for s in summaries],
        "figures": [str(p.relative_to(out_dir)) for p in figures],
        "trials_csv_header": ",".join(TRIALS_CSV_HEADER),
    }
    summary_path = out_dir / "summary.json"
    with open(summary_path, "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")

    return ExperimentReport(
        summaries=summaries,
        all_pass=all_pass,
        trials_csv=trials_path,
        summary_json=summary_path,
        figures=figures,
    )
