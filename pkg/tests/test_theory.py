"""Tests for the closed-form success bound."""

import math

import pytest

from flurrysda import BoundInputs, GapNonPositive, bound, compute_C, n_min
from flurrysda.theory import BoundResult, bound_table, evaluate

# frozen with 50-digit arithmetic:
#   exp(0.81/4)            = 1.224460085121914813...
#   exp(0.01/4)            = 1.002503127605795085...
#   1 - 3000/C**55         = 0.95633168217377869401...
#   1 - 3000/C**54         = 0.94652988783737422963...
C_SINGLE = 1.224460085121914813
C_SMALL_GAP = 1.002503127605795085
BOUND_55 = 0.95633168217377869401
BOUND_54 = 0.94652988783737422963


def test_compute_c_single_member():
    assert math.isclose(compute_C([(1.0, 0.1)]), C_SINGLE, rel_tol=1e-12)


def test_compute_c_min_over_gaps():
    # the 0.1-gap member dominates the min
    c = compute_C([(1.0, 0.1), (0.5, 0.4)])
    assert math.isclose(c, C_SMALL_GAP, rel_tol=1e-12)
    assert c < compute_C([(1.0, 0.1)])


def test_compute_c_rejects_nonpositive_gap():
    with pytest.raises(GapNonPositive):
        compute_C([(0.5, 0.5)])
    with pytest.raises(GapNonPositive):
        compute_C([(0.3, 0.5)])


def test_compute_c_exceeds_one():
    assert compute_C([(0.2001, 0.2)]) > 1.0


def test_bound_at_zero_pairs_is_vacuous():
    b = bound(BoundInputs(m=10, group_probs=((1.0, 0.1),) * 2, n=0))
    assert b == 1.0 - 20.0
    assert BoundResult(C=C_SINGLE, bound=b).clamped == 0.0


def test_bound_strictly_increasing_in_n():
    probs = ((0.8, 0.5),) * 3
    values = [bound(BoundInputs(m=100, group_probs=probs, n=n)) for n in range(0, 400, 25)]
    assert all(b2 > b1 for b1, b2 in zip(values, values[1:]))


def test_bound_worked_value():
    probs = ((1.0, 0.1),) * 3
    assert math.isclose(
        bound(BoundInputs(m=1000, group_probs=probs, n=55)), BOUND_55, rel_tol=1e-12
    )
    assert math.isclose(
        bound(BoundInputs(m=1000, group_probs=probs, n=54)), BOUND_54, rel_tol=1e-12
    )


def test_n_min_worked_value():
    probs = ((1.0, 0.1),) * 3
    n = n_min(1000, probs, 0.95)
    assert n == 55
    assert bound(BoundInputs(m=1000, group_probs=probs, n=n)) >= 0.95
    assert bound(BoundInputs(m=1000, group_probs=probs, n=n - 1)) < 0.95


def test_n_min_logarithmic_in_m():
    probs = ((1.0, 0.1),) * 3
    log_c = 0.81 / 4.0
    step = math.ceil(math.log(2) / log_c)
    for m in (10, 100, 10_000):
        assert n_min(2 * m, probs, 0.95) - n_min(m, probs, 0.95) <= step


def test_n_min_tiny_confidence_still_positive():
    probs = ((1.0, 0.1),) * 2
    n = n_min(10, probs, 1e-9)
    assert n >= 1
    assert n >= math.ceil(math.log(20) / (0.81 / 4.0))


def test_n_min_rejects_bad_confidence():
    with pytest.raises(ValueError):
        n_min(10, ((1.0, 0.1),), 1.0)
    with pytest.raises(ValueError):
        n_min(10, ((1.0, 0.1),), 0.0)


def test_self_consistency_grid():
    # bound(n_min) >= confidence > bound(n_min - 1) across the whole grid
    # (combos with k + 1 > m are infeasible and skipped).
    for m in (10, 100, 1000, 10**6):
        for k in (2, 3, 10):
            if m < k + 1:
                continue
            for gap in (0.05, 0.3, 0.9):
                probs = ((0.05 + gap, 0.05),) * k
                for conf in (0.5, 0.95, 0.999):
                    n = n_min(m, probs, conf)
                    assert bound(BoundInputs(m=m, group_probs=probs, n=n)) >= conf
                    assert bound(BoundInputs(m=m, group_probs=probs, n=n - 1)) < conf


def test_bound_monotone_in_parameters():
    base = [(0.6, 0.3), (0.9, 0.2)]
    n = 100
    b0 = bound(BoundInputs(m=100, group_probs=tuple(base), n=n))
    raised_t = bound(BoundInputs(m=100, group_probs=((0.7, 0.3), (0.9, 0.2)), n=n))
    lowered_r = bound(BoundInputs(m=100, group_probs=((0.6, 0.2), (0.9, 0.2)), n=n))
    bigger_m = bound(BoundInputs(m=200, group_probs=tuple(base), n=n))
    bigger_k = bound(BoundInputs(m=100, group_probs=tuple(base) + ((0.6, 0.3),), n=n))
    assert raised_t >= b0
    assert lowered_r >= b0
    assert bigger_m < b0
    assert bigger_k < b0


def test_n_min_scaling_three_decades():
    probs = ((1.0, 0.1),) * 3
    assert n_min(10**6, probs, 0.95) <= 3 * n_min(10**3, probs, 0.95)


def test_bound_table_rows():
    rows = list(bound_table([100], [3], [(1.0, 0.1)], [10, 20]))
    assert len(rows) == 2
    m, k, t, r, n, c_val, b = rows[0]
    assert (m, k, t, r, n) == (100, 3, 1.0, 0.1, 10)
    assert math.isclose(c_val, C_SINGLE, rel_tol=1e-12)
    assert math.isclose(b, 1.0 - 300.0 * math.exp(-10 * 0.2025), rel_tol=1e-12)
    assert rows[1][6] > b


def test_bound_inputs_validation():
    with pytest.raises(ValueError):
        BoundInputs(m=3, group_probs=((1.0, 0.1),) * 3, n=1)
    with pytest.raises(ValueError):
        BoundInputs(m=10, group_probs=((1.0, 0.1),), n=-1)
    with pytest.raises(GapNonPositive):
        BoundInputs(m=10, group_probs=((0.5, 0.5),), n=1)


def test_evaluate_bundles_c_and_bound():
    res = evaluate(BoundInputs(m=1000, group_probs=((1.0, 0.1),) * 3, n=55))
    assert math.isclose(res.C, C_SINGLE, rel_tol=1e-12)
    assert math.isclose(res.bound, BOUND_55, rel_tol=1e-12)
    assert res.clamped == res.bound
