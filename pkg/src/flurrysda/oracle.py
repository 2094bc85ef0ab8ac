"""Exact success probability by exhaustive enumeration.

For tiny populations the full joint outcome space of every non-Bob user's
per-epoch receive indicator (n target + n random epochs each) is small
enough to enumerate: (m-1)*2n independent Bernoulli draws, one bit each.
The success probability is the total weight of outcomes where every
member's count strictly exceeds every non-member's.  This is deliberately
a different computation from the Monte Carlo path so the two can check
each other.
"""

from __future__ import annotations

import numpy as np

from .errors import TooLarge
from .traffic import PopulationSpec

MAX_USERS = 6
MAX_PAIRS = 4
MAX_BITS = 24

_CHUNK = 1 << 20


def brute_force_oracle(spec: PopulationSpec, n: int) -> float:
    """Exact P(all members outrank all non-members) after ``n`` pairs.

    Limits: m <= 6, n <= 4 and (m-1)*2n <= 24 total Bernoulli bits, i.e.
    at most 2**24 outcomes.  Raises TooLarge beyond that.
    """
    m = spec.total_users
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    users = [u for u in range(m) if u != spec.bob]
    bits = len(users) * 2 * n
    if m > MAX_USERS or n > MAX_PAIRS or bits > MAX_BITS:
        raise TooLarge(
            f"enumeration needs m <= {MAX_USERS}, n <= {MAX_PAIRS} and "
            f"(m-1)*2n <= {MAX_BITS}; got m={m}, n={n} ({bits} bits)"
        )

    member_rows = np.array([i for i, u in enumerate(users) if u in spec.group])
    other_rows = np.array([i for i, u in enumerate(users) if u not in spec.group])
    t = spec.t_array
    r = spec.r_array

    total = 0.0
    outcomes = 1 << bits
    for lo in range(0, outcomes, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, outcomes), dtype=np.uint32)
        prob = np.ones(len(idx), dtype=np.float64)
        counts = np.zeros((len(users), len(idx)), dtype=np.int8)
        for j, u in enumerate(users):
            base = j * 2 * n
            for e in range(2 * n):
                bit = (idx >> np.uint32(base + e)) & np.uint32(1)
                on = bit.astype(bool)
                p = t[u] if e < n else r[u]
                prob *= np.where(on, p, 1.0 - p)
                if e < n:
                    counts[j] += on
                else:
                    counts[j] -= on
        member_min = counts[member_rows].min(axis=0)
        if len(other_rows):
            success = member_min > counts[other_rows].max(axis=0)
        else:
            success = np.ones(len(idx), dtype=bool)
        total += float(prob[success].sum())
    return total
