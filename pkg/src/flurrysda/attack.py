"""The counting attack over target/random epoch pairs.

Every user that received a message in a target epoch gets +1, every user
that received one in the paired random epoch gets -1; after n pairs the
highest-scoring users are the likely group.  Success is the strict event:
every true member outranks every non-member (ties count as failure).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .epochs import (
    RANDOM,
    TARGET,
    EpochSample,
    FlurryParams,
    detect_flurries,
    extract_target_epoch,
    sample_random_epoch,
)
from .errors import LabelMismatch, NoFlurries
from .observer import ObservedLog


@dataclass
class CountTable:
    """Signed per-user scores over all non-Bob users."""

    counts: dict[int, int]
    pairs_processed: int = 0

    @classmethod
    def empty(cls, total_users: int, bob: int) -> "CountTable":
        return cls(counts={u: 0 for u in range(total_users) if u != bob})


@dataclass
class AttackConfig:
    """Attack-side parameters; ``k_hat`` is the presumed group size."""

    n: int
    k_hat: int
    epoch_length: float = 60.0
    flurry: FlurryParams = field(default_factory=FlurryParams)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.k_hat < 1:
            raise ValueError(f"k_hat must be >= 1, got {self.k_hat}")
        if self.epoch_length <= 0:
            raise ValueError(f"epoch_length must be positive, got {self.epoch_length}")


@dataclass
class AttackResult:
    """Final ranking plus bookkeeping for diagnostics and export."""

    ranked_users: list[int]
    top_k: list[int]
    success: bool | None
    table: CountTable
    n_requested: int
    flurries_detected: int

    def to_json_dict(self, config_echo: Mapping | None = None) -> dict:
        return {
            "ranked": [[u, self.table.counts[u]] for u in self.ranked_users],
            "success": self.success,
            "pairs_processed": self.table.pairs_processed,
            "config_echo": dict(config_echo) if config_echo else {},
        }


def process_pair(table: CountTable, target: EpochSample, random: EpochSample) -> CountTable:
    """Apply one target/random pair to the table (mutates and returns it)."""
    if target.label != TARGET:
        raise LabelMismatch(f"expected a target epoch, got {target.label!r}")
    if random.label != RANDOM:
        raise LabelMismatch(f"expected a random epoch, got {random.label!r}")
    for u in target.receivers:
        table.counts[u] += 1
    for u in random.receivers:
        table.counts[u] -= 1
    table.pairs_processed += 1
    return table


def rank_users(counts: Mapping[int, int]) -> list[int]:
    """Users sorted by count descending, ties broken by lower id first."""
    return sorted(counts, key=lambda u: (-counts[u], u))


def judge_success(counts: Mapping[int, int], true_group: Iterable[int]) -> bool:
    """True iff every member strictly outranks every non-member.

    A tie between a member and a non-member counts as failure.  With no
    non-members the event holds vacuously.
    """
    group = set(true_group)
    if not group:
        raise ValueError("true_group must be nonempty")
    member_min = min(counts[u] for u in group)
    others = [c for u, c in counts.items() if u not in group]
    if not others:
        return True
    return member_min > max(others)


def run_attack(
    log: ObservedLog,
    bob: int,
    total_users: int,
    cfg: AttackConfig,
    rng: np.random.Generator,
    true_group: Iterable[int] | None = None,
    samples_out: list[EpochSample] | None = None,
) -> AttackResult:
    """Run the full attack against an observed log.

    Detects flurries, pairs the first ``n`` target epochs with uniformly
    sampled random epochs (fewer if fewer usable flurries exist), and
    ranks all non-Bob users by count.  ``success`` is only filled in when
    the caller supplies the ground-truth group.  ``samples_out`` collects
    the epoch samples actually used, for export and diagnostics.
    """
    flurries = detect_flurries(log, bob, cfg.flurry)
    if not flurries:
        raise NoFlurries("no flurry of to-Bob events detected in the log")
    usable = [f for f in flurries if f >= cfg.epoch_length]
    if not usable:
        raise NoFlurries(
            "every detected flurry starts before one epoch length has elapsed"
        )
    n_used = min(cfg.n, len(usable))
    table = CountTable.empty(total_users, bob)
    for flurry_time in usable[:n_used]:
        target = extract_target_epoch(log, flurry_time, cfg.epoch_length, bob)
        random_epoch = sample_random_epoch(log, cfg.epoch_length, rng, bob)
        if samples_out is not None:
            samples_out.extend((target, random_epoch))
        process_pair(table, target, random_epoch)
    ranked = rank_users(table.counts)
    success = judge_success(table.counts, true_group) if true_group is not None else None
    return AttackResult(
        ranked_users=ranked,
        top_k=ranked[: cfg.k_hat],
        success=success,
        table=table,
        n_requested=cfg.n,
        flurries_detected=len(flurries),
    )


def result_to_json(result: AttackResult, config_echo: Mapping | None = None, path=None) -> str:
    """Serialize an attack result; writes to ``path`` when given."""
    text = json.dumps(result.to_json_dict(config_echo), indent=2)
    if path is not None:
        with open(path, "w") as f:
            f.write(text + "\n")
    return text
