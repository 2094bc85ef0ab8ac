"""The server's view of a trace under sealed sender.

The observation keeps only (timestamp, recipient) per event.  Senders and
message kinds never make it into :class:`ObservedLog`, so nothing built on
top of it can recover who sent what; the attack modules accept only this
representation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .traffic import TrafficTrace


class ObservedEvent(NamedTuple):
    timestamp: float
    recipient: int


@dataclass
class ObservedLog:
    """Time-ordered delivery observations over ``[0, horizon]``."""

    timestamps: np.ndarray
    recipients: np.ndarray
    horizon: float

    def __post_init__(self) -> None:
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        self.recipients = np.asarray(self.recipients, dtype=np.int64)
        if len(self.timestamps) != len(self.recipients):
            raise ValueError("timestamp and recipient columns differ in length")
        if len(self.timestamps) > 1 and np.any(np.diff(self.timestamps) < 0):
            raise ValueError("observed log must be sorted by timestamp")

    def __len__(self) -> int:
        return len(self.timestamps)

    def events(self) -> Iterator[ObservedEvent]:
        for ts, rec in zip(self.timestamps, self.recipients):
            yield ObservedEvent(float(ts), int(rec))


def observe(trace: TrafficTrace) -> ObservedLog:
    """Project a trace to what the server sees: recipients and times only."""
    return ObservedLog(
        timestamps=trace.timestamps.copy(),
        recipients=trace.recipients.copy(),
        horizon=trace.horizon,
    )


def observed_log_to_csv(log: ObservedLog, path) -> None:
    """Write ``timestamp,recipient`` rows."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["timestamp", "recipient"])
        for ev in log.events():
            w.writerow([repr(ev.timestamp), ev.recipient])


def observed_log_from_csv(path, horizon: float | None = None) -> ObservedLog:
    """Read an observed log.  Horizon defaults to the last timestamp."""
    timestamps: list[float] = []
    recipients: list[int] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["timestamp", "recipient"]:
            raise ValueError(f"expected header 'timestamp,recipient', got {header}")
        for row in reader:
            timestamps.append(float(row[0]))
            recipients.append(int(row[1]))
    if horizon is None:
        horizon = timestamps[-1] if timestamps else 0.0
    return ObservedLog(
        timestamps=np.array(timestamps, dtype=np.float64),
        recipients=np.array(recipients, dtype=np.int64),
        horizon=float(horizon),
    )
