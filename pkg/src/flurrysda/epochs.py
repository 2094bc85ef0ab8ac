"""Epoch analysis over an observed log.

Flurries are maximal runs of consecutive to-Bob events whose inter-event
gaps stay within ``gap_max`` and whose length reaches ``min_size``.  A
target epoch is the fixed-length window immediately before a flurry; a
random epoch starts uniformly over the attack window.  Both report the set
of non-Bob users that received at least one message inside the window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import HorizonTooShort, WindowUnderflow
from .observer import ObservedLog

TARGET = "target"
RANDOM = "random"


@dataclass(frozen=True)
class FlurryParams:
    """Detection thresholds: max in-flurry gap and minimum run length."""

    gap_max: float = 2.5
    min_size: int = 2

    def __post_init__(self) -> None:
        if self.gap_max <= 0:
            raise ValueError(f"gap_max must be positive, got {self.gap_max}")
        if self.min_size < 2:
            raise ValueError(f"min_size must be >= 2, got {self.min_size}")

    @classmethod
    def for_group_size(cls, k_hat: int, gap_max: float = 2.5) -> "FlurryParams":
        """Default thresholds when the attacker presumes a group size."""
        return cls(gap_max=gap_max, min_size=max(2, k_hat))


@dataclass(frozen=True)
class EpochSample:
    """Receivers (Bob excluded) inside one epoch window ``[start, end)``."""

    label: str
    receivers: frozenset[int]
    window: tuple[float, float]

    def __post_init__(self) -> None:
        if self.label not in (TARGET, RANDOM):
            raise ValueError(f"label must be '{TARGET}' or '{RANDOM}', got {self.label!r}")


def detect_flurries(log: ObservedLog, bob: int, params: FlurryParams) -> list[float]:
    """Start times of maximal tight runs of to-Bob events.

    Runs are split wherever two consecutive to-Bob events are more than
    ``gap_max`` apart; only runs of at least ``min_size`` events qualify.
    Maximal runs are disjoint by construction.
    """
    to_bob = log.timestamps[log.recipients == bob]
    if len(to_bob) == 0:
        return []
    breaks = np.flatnonzero(np.diff(to_bob) > params.gap_max) + 1
    starts = np.concatenate(([0], breaks))
    ends = np.concatenate((breaks, [len(to_bob)]))
    lengths = ends - starts
    return [float(to_bob[s]) for s, n in zip(starts, lengths) if n >= params.min_size]


def _receivers_in(log: ObservedLog, start: float, end: float, bob: int) -> frozenset[int]:
    i0 = int(np.searchsorted(log.timestamps, start, side="left"))
    i1 = int(np.searchsorted(log.timestamps, end, side="left"))
    recipients = log.recipients[i0:i1]
    return frozenset(np.unique(recipients[recipients != bob]).tolist())


def extract_target_epoch(
    log: ObservedLog, flurry_time: float, epoch_length: float, bob: int
) -> EpochSample:
    """The epoch ``[flurry_time - L, flurry_time)`` preceding a flurry.

    The half-open window excludes the flurry's own receipts.
    """
    if flurry_time < epoch_length:
        raise WindowUnderflow(
            f"flurry at {flurry_time} has no room for a {epoch_length}s epoch before it"
        )
    start = flurry_time - epoch_length
    return EpochSample(
        label=TARGET,
        receivers=_receivers_in(log, start, flurry_time, bob),
        window=(start, flurry_time),
    )


def sample_random_epoch(
    log: ObservedLog, epoch_length: float, rng: np.random.Generator, bob: int
) -> EpochSample:
    """An epoch starting uniformly on ``[0, horizon - L]``."""
    if log.horizon < epoch_length:
        raise HorizonTooShort(
            f"horizon {log.horizon} shorter than one epoch ({epoch_length})"
        )
    start = rng.uniform(0.0, log.horizon - epoch_length)
    return EpochSample(
        label=RANDOM,
        receivers=_receivers_in(log, start, start + epoch_length, bob),
        window=(start, start + epoch_length),
    )


def epoch_samples_to_csv(samples: Iterable[EpochSample], path) -> None:
    """Write ``label,window_start,window_end,receiver_ids`` rows."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label", "window_start", "window_end", "receiver_ids"])
        for s in samples:
            ids = ";".join(str(u) for u in sorted(s.receivers))
            w.writerow([s.label, repr(s.window[0]), repr(s.window[1]), ids])
