"""Closed-form success guarantee for the counting attack.

For a population of ``m`` users and group members with per-epoch
probabilities ``t_u > r_u``, the probability that after ``n`` epoch pairs
every member outranks every non-member is at least ``1 - m*k / C**n``
with ``C = min_u exp((t_u - r_u)**2 / 4) > 1``.  The bound can be negative
for small ``n``; it is kept exact here and clamped only for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import GapNonPositive

GroupProbs = Sequence[tuple[float, float]]


def _min_log_c(group_probs: GroupProbs) -> float:
    if not group_probs:
        raise ValueError("need at least one group member")
    log_c = math.inf
    for t, r in group_probs:
        if not (0.0 <= r <= 1.0 and 0.0 <= t <= 1.0):
            raise ValueError(f"probabilities must lie in [0, 1], got (t={t}, r={r})")
        if t <= r:
            raise GapNonPositive(f"member needs t > r, got (t={t}, r={r})")
        log_c = min(log_c, (t - r) ** 2 / 4.0)
    return log_c


def compute_C(group_probs: GroupProbs) -> float:
    """The per-pair separation constant: min over members of exp(gap^2/4)."""
    return math.exp(_min_log_c(group_probs))


@dataclass(frozen=True)
class BoundInputs:
    m: int
    group_probs: tuple[tuple[float, float], ...]
    n: int

    def __post_init__(self) -> None:
        if self.m < len(self.group_probs) + 1:
            raise ValueError(
                f"m={self.m} too small for a group of {len(self.group_probs)} plus the target"
            )
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        _min_log_c(self.group_probs)


@dataclass(frozen=True)
class BoundResult:
    C: float
    bound: float

    @property
    def clamped(self) -> float:
        """Display value: the bound truncated into [0, 1]."""
        return min(1.0, max(0.0, self.bound))


def bound(inputs: BoundInputs) -> float:
    """Exact lower bound ``1 - m*k / C**n`` (may be negative)."""
    log_c = _min_log_c(inputs.group_probs)
    k = len(inputs.group_probs)
    return 1.0 - inputs.m * k * math.exp(-inputs.n * log_c)


def evaluate(inputs: BoundInputs) -> BoundResult:
    return BoundResult(C=compute_C(inputs.group_probs), bound=bound(inputs))


def n_min(m: int, group_probs: GroupProbs, confidence: float) -> int:
    """Smallest n whose bound reaches ``confidence``.

    Closed form ``ceil(ln(m*k/(1-confidence)) / ln C)``, then nudged by
    direct bound evaluation to guard the ceiling against floating-point
    edge cases.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    log_c = _min_log_c(group_probs)
    k = len(group_probs)
    n = max(0, math.ceil(math.log(m * k / (1.0 - confidence)) / log_c))
    probs = tuple(group_probs)

    def value(at: int) -> float:
        return bound(BoundInputs(m=m, group_probs=probs, n=at))

    while value(n) < confidence:
        n += 1
    while n > 0 and value(n - 1) >= confidence:
        n -= 1
    return n


def bound_table(
    ms: Iterable[int],
    ks: Iterable[int],
    tr_pairs: Iterable[tuple[float, float]],
    ns: Iterable[int],
) -> Iterator[tuple[int, int, float, float, int, float, float]]:
    """Rows ``(m, k, t, r, n, C, bound)`` over a homogeneous-group grid."""
    for m in ms:
        for k in ks:
            for t, r in tr_pairs:
                probs = ((t, r),) * k
                c_val = compute_C(probs)
                for n in ns:
                    b = bound(BoundInputs(m=m, group_probs=probs, n=n))
                    yield (m, k, t, r, n, c_val, b)
