"""Generative traffic models for the sealed-sender group setting.

Two modes are provided:

* An idealized per-epoch Bernoulli model: each user independently receives
  at least one message in an epoch with a fixed probability (``t_u`` in a
  target epoch, ``r_u`` in a random one).  This is the model the success
  bound is stated for, so it is what bound-validation experiments use.
* A continuous-time trace model with explicit delivered receipts: the
  target (Bob) sends group messages, every group member receives a copy
  and answers with a receipt, and independent Poisson background traffic
  covers everyone.  Receipts bunch up into the tight "to Bob" clusters the
  detector looks for.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import HorizonTooShort, InvalidRate

KIND_CONTENT = "content"
KIND_RECEIPT = "receipt"

_KIND_CODES = {KIND_CONTENT: 0, KIND_RECEIPT: 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


@dataclass(frozen=True)
class UserProfile:
    """Per-user receive probabilities.

    ``r`` applies during a random epoch, ``t`` during a target epoch.
    Group members must have ``t > r``; everyone else has ``t == r``.
    """

    r: float
    t: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.r <= 1.0 and 0.0 <= self.t <= 1.0):
            raise InvalidRate(f"probabilities must lie in [0, 1], got r={self.r}, t={self.t}")


@dataclass
class PopulationSpec:
    """The simulated world: ``total_users`` users, a target, and his group.

    ``profiles[u]`` is the profile of user ``u``; user ids are dense in
    ``0..total_users-1``.  ``force=True`` skips the structural gap checks
    (members need ``t > r``, non-members ``t == r``) so that degenerate
    configurations can be fed to the enumeration oracle.
    """

    total_users: int
    bob: int
    group: frozenset[int]
    profiles: tuple[UserProfile, ...]
    force: bool = field(default=False, repr=False)

    def __post_init__(self) -> None:
        m = self.total_users
        self.group = frozenset(self.group)
        self.profiles = tuple(self.profiles)
        if m < 2:
            raise ValueError(f"need at least two users, got m={m}")
        if not 0 <= self.bob < m:
            raise ValueError(f"bob={self.bob} outside 0..{m - 1}")
        if self.bob in self.group:
            raise ValueError("bob cannot be a member of his own group")
        if not self.group:
            raise ValueError("group must be nonempty")
        if not all(0 <= u < m for u in self.group):
            raise ValueError("group contains out-of-range user ids")
        if len(self.profiles) != m:
            raise ValueError(f"need exactly one profile per user, got {len(self.profiles)}")
        if not self.force:
            for u in range(m):
                p = self.profiles[u]
                if u in self.group:
                    if not p.t > p.r:
                        raise ValueError(
                            f"group member {u} needs t > r, got t={p.t}, r={p.r}"
                        )
                elif p.t != p.r:
                    raise ValueError(f"non-member {u} must have t == r, got t={p.t}, r={p.r}")
        self._t_array = np.array([p.t for p in self.profiles], dtype=np.float64)
        self._r_array = np.array([p.r for p in self.profiles], dtype=np.float64)

    @classmethod
    def uniform(
        cls,
        m: int,
        k: int,
        *,
        t: float,
        r: float,
        bob: int = 0,
        force: bool = False,
    ) -> "PopulationSpec":
        """Homogeneous population: ``k`` members with (t, r), everyone else (r, r)."""
        members = [u for u in range(m) if u != bob][:k]
        if len(members) < k:
            raise ValueError(f"cannot place a group of {k} among {m} users")
        group = frozenset(members)
        profiles = tuple(
            UserProfile(r=r, t=t) if u in group else UserProfile(r=r, t=r) for u in range(m)
        )
        return cls(total_users=m, bob=bob, group=group, profiles=profiles, force=force)

    @property
    def k(self) -> int:
        return len(self.group)

    @property
    def t_array(self) -> np.ndarray:
        return self._t_array

    @property
    def r_array(self) -> np.ndarray:
        return self._r_array

    @property
    def non_bob_ids(self) -> np.ndarray:
        ids = np.arange(self.total_users, dtype=np.int64)
        return ids[ids != self.bob]


@dataclass(frozen=True)
class IdealEpochDraw:
    """One idealized epoch: who received at least one message."""

    is_target: bool
    receivers: frozenset[int]


def draw_ideal_epoch(
    spec: PopulationSpec, is_target: bool, rng: np.random.Generator
) -> IdealEpochDraw:
    """Draw one epoch under the per-epoch Bernoulli model.

    User ``u`` is included independently with probability ``t_u`` in a
    target epoch and ``r_u`` otherwise.  Consumes exactly ``total_users``
    uniforms from ``rng``, in user-id order.
    """
    u = rng.random(spec.total_users)
    p = spec.t_array if is_target else spec.r_array
    return IdealEpochDraw(is_target=is_target, receivers=frozenset(np.flatnonzero(u < p).tolist()))


def background_rate_for(r: float, epoch_length: float) -> float:
    """Poisson rate giving per-epoch receive probability exactly ``r``.

    Solves 1 - exp(-rate * L) = r for the rate.
    """
    if not 0.0 <= r < 1.0:
        raise InvalidRate(f"background receive probability must lie in [0, 1), got {r}")
    if epoch_length <= 0:
        raise InvalidRate(f"epoch length must be positive, got {epoch_length}")
    return -math.log1p(-r) / epoch_length


@dataclass
class TraceConfig:
    """Knobs for the continuous-time trace generator.

    Bob's group sends come either from an explicit ``send_times`` override
    or a Poisson process of rate ``send_rate``.  Each member's copy of a
    group message is delivered at ``send + jitter`` (uniform on
    ``[0, jitter_max]``) and answered with a receipt after an additional
    uniform latency on ``[receipt_min, receipt_max]``.  Background content
    arrives per user as a Poisson process whose rate is calibrated from
    the user's ``r`` so the per-epoch receive probability matches.
    """

    horizon: float
    epoch_length: float = 60.0
    send_rate: float | None = None
    send_times: Sequence[float] | None = None
    receipt_min: float = 0.1
    receipt_max: float = 2.0
    jitter_max: float = 0.0

    def __post_init__(self) -> None:
        if self.send_rate is not None and self.send_rate < 0:
            raise InvalidRate(f"send_rate must be >= 0, got {self.send_rate}")
        if not 0 <= self.receipt_min <= self.receipt_max:
            raise InvalidRate(
                f"need 0 <= receipt_min <= receipt_max, got [{self.receipt_min}, {self.receipt_max}]"
            )
        if self.jitter_max < 0:
            raise InvalidRate(f"jitter_max must be >= 0, got {self.jitter_max}")


class TraceEvent(NamedTuple):
    timestamp: float
    sender: int
    recipient: int
    kind: str


@dataclass
class TrafficTrace:
    """Full message trace, including the ground truth the server never sees.

    Events are stored columnar and sorted by timestamp.  ``send_times``
    carries Bob's actual group-send instants for diagnostics; the observed
    projection drops it along with every sender.
    """

    timestamps: np.ndarray
    senders: np.ndarray
    recipients: np.ndarray
    kinds: np.ndarray
    horizon: float
    send_times: np.ndarray

    def __len__(self) -> int:
        return len(self.timestamps)

    def events(self) -> Iterator[TraceEvent]:
        for ts, s, rec, kind in zip(self.timestamps, self.senders, self.recipients, self.kinds):
            yield TraceEvent(float(ts), int(s), int(rec), _KIND_NAMES[int(kind)])


def generate_trace(
    spec: PopulationSpec, sim: TraceConfig, rng: np.random.Generator
) -> TrafficTrace:
    """Generate one trace: Bob's group sends, member receipts, background.

    Draw order is fixed (send times, then per-send jitters and latencies in
    member-id order, then background counts/times/senders per user id) so a
    given seed and config always yields the identical trace.  Events past
    the horizon are dropped.
    """
    if sim.horizon < sim.epoch_length:
        raise HorizonTooShort(
            f"horizon {sim.horizon} shorter than one epoch ({sim.epoch_length})"
        )
    m = spec.total_users
    members = np.array(sorted(spec.group), dtype=np.int64)
    k = len(members)

    if sim.send_times is not None:
        send_times = np.sort(np.asarray(sim.send_times, dtype=np.float64))
        if len(send_times) and (send_times[0] < 0 or send_times[-1] >= sim.horizon):
            raise ValueError("forced send times must lie in [0, horizon)")
    elif sim.send_rate:
        n_sends = rng.poisson(sim.send_rate * sim.horizon)
        send_times = np.sort(rng.random(n_sends) * sim.horizon)
    else:
        send_times = np.empty(0, dtype=np.float64)

    ts_parts: list[np.ndarray] = []
    snd_parts: list[np.ndarray] = []
    rcp_parts: list[np.ndarray] = []
    kind_parts: list[np.ndarray] = []

    for s in send_times:
        jitter = rng.random(k) * sim.jitter_max
        latency = sim.receipt_min + rng.random(k) * (sim.receipt_max - sim.receipt_min)
        content_at = s + jitter
        receipt_at = content_at + latency
        ts_parts.append(np.concatenate([content_at, receipt_at]))
        snd_parts.append(np.concatenate([np.full(k, spec.bob, dtype=np.int64), members]))
        rcp_parts.append(np.concatenate([members, np.full(k, spec.bob, dtype=np.int64)]))
        kind_parts.append(
            np.concatenate([np.zeros(k, dtype=np.uint8), np.ones(k, dtype=np.uint8)])
        )

    # Background: per-user Poisson arrivals calibrated from r_u.
    rates = np.array(
        [background_rate_for(p.r, sim.epoch_length) for p in spec.profiles], dtype=np.float64
    )
    counts = rng.poisson(rates * sim.horizon)
    total = int(counts.sum())
    if total:
        bg_times = rng.random(total) * sim.horizon
        bg_recipients = np.repeat(np.arange(m, dtype=np.int64), counts)
        picks = rng.integers(0, m - 1, size=total)
        bg_senders = picks + (picks >= bg_recipients)
        ts_parts.append(bg_times)
        snd_parts.append(bg_senders)
        rcp_parts.append(bg_recipients)
        kind_parts.append(np.zeros(total, dtype=np.uint8))

    if ts_parts:
        timestamps = np.concatenate(ts_parts)
        senders = np.concatenate(snd_parts)
        recipients = np.concatenate(rcp_parts)
        kinds = np.concatenate(kind_parts)
    else:
        timestamps = np.empty(0, dtype=np.float64)
        senders = np.empty(0, dtype=np.int64)
        recipients = np.empty(0, dtype=np.int64)
        kinds = np.empty(0, dtype=np.uint8)

    keep = timestamps <= sim.horizon
    timestamps, senders, recipients, kinds = (
        timestamps[keep],
        senders[keep],
        recipients[keep],
        kinds[keep],
    )
    order = np.argsort(timestamps, kind="stable")
    return TrafficTrace(
        timestamps=timestamps[order],
        senders=senders[order],
        recipients=recipients[order],
        kinds=kinds[order],
        horizon=sim.horizon,
        send_times=send_times,
    )


def trace_to_csv(trace: TrafficTrace, path) -> None:
    """Write the full trace as ``timestamp,sender,recipient,kind`` rows."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["timestamp", "sender", "recipient", "kind"])
        for ev in trace.events():
            w.writerow([repr(ev.timestamp), ev.sender, ev.recipient, ev.kind])
