from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochsched import DomainError, Instance, Objective, exact_solve
from stochsched.grouping import (
    LEFT,
    LOWER,
    NONINCREASING,
    RIGHT,
    UPPER,
    HistogramGuess,
    assign_scenario_bound,
    build_scenario_list,
    enumerate_bound_histograms,
    representative_weights,
    select_representatives,
)
from stochsched.oracle import exact_fixed_bags

from .conftest import distributions, sizes

F = Fraction


def test_scenario_list_examples():
    sl = build_scenario_list((F(1, 2), F(1, 2)))
    assert sl.entries == (1, 2) and sl.total == 1 and sl.Q(1) == F(1, 2) and sl.Q(2) == 1
    sl = build_scenario_list((0, 1))
    assert sl.entries == (2,) and sl.Q_before(2) == 0
    sl = build_scenario_list((F(9, 10), F(1, 20), F(1, 20)))
    assert sl.prefix == (F(9, 10), F(19, 20), 1)


def test_scenario_list_errors():
    with pytest.raises(DomainError):
        build_scenario_list((1, 0, 0), (2, 3))
    with pytest.raises(DomainError):
        build_scenario_list((1, 0), (0, 2))


def test_representative_examples():
    sl = build_scenario_list((F(1, 2), F(1, 2)))
    assert select_representatives(sl, F(1, 8)) == (1, 2)
    sl = build_scenario_list((F(9, 10), F(1, 20), F(1, 20)))
    assert select_representatives(sl, F(1, 8)) == (1,)
    assert select_representatives(sl, F(1, 8), augment="max") == (1, 3)
    sl = build_scenario_list((F(1, 5), F(3, 10), F(1, 2)))
    assert select_representatives(sl, F(1, 10)) == (1, 2, 3)


def test_histogram_examples():
    assert len(list(enumerate_bound_histograms((1,), [3, 5]))) == 2
    pairs = {h.bounds for h in enumerate_bound_histograms((1, 2), [5, 3], NONINCREASING)}
    assert pairs == {(5, 5), (5, 3), (3, 3)}
    assert list(enumerate_bound_histograms((1, 2), [])) == []


def test_histogram_pruning():
    reps, weights = (1, 2), (F(1, 2), F(1, 2))
    full = list(enumerate_bound_histograms(reps, [1, 2, 3], None, UPPER, weights))
    kept = list(enumerate_bound_histograms(reps, [1, 2, 3], None, UPPER, weights, bound=F(5, 2)))
    assert {h.bounds for h in kept} == {h.bounds for h in full if h.weight < F(5, 2)}
    kept = list(enumerate_bound_histograms(reps, [1, 2, 3], None, LOWER, weights, bound=2))
    assert {h.bounds for h in kept} == {h.bounds for h in full if h.weight > 2}


def test_copy_rules():
    h = HistogramGuess((1,), (F(7),), UPPER)
    assert assign_scenario_bound(h, 3) == 7
    h = HistogramGuess((3,), (F(4),), LOWER)
    assert assign_scenario_bound(h, 1) == 4
    h = HistogramGuess((1, 3), (F(9), F(4)), UPPER)
    assert assign_scenario_bound(h, 3) == 4 and assign_scenario_bound(h, 2) == 9
    with pytest.raises(DomainError):
        assign_scenario_bound(HistogramGuess((2,), (F(1),), UPPER), 1)
    with pytest.raises(DomainError):
        assign_scenario_bound(HistogramGuess((2,), (F(1),), LOWER), 3)


@given(st.integers(2, 8).flatmap(distributions), st.sampled_from([F(1, 8), F(1, 25), F(1, 3)]))
def test_mass_between_representatives_below_step(q, step):
    sl = build_scenario_list(q)
    reps = select_representatives(sl, step)
    assert reps
    for k, qk in zip(sl.entries, sl.probs):
        if k in reps:
            continue
        # the bar of a skipped scenario holds no multiple of the step
        lo, hi = sl.Q_before(k), sl.Q(k)
        assert -((-lo) // step) * step >= hi
    for a, b in zip(reps, reps[1:]):
        between = sum((p for k, p in zip(sl.entries, sl.probs) if a < k < b), F(0))
        assert between < step
    weights = representative_weights(sl, reps, LEFT)
    assert sum(weights.values()) == sl.total


@settings(max_examples=40)
@given(sizes(2, 6), st.integers(2, 4), st.data())
def test_stepped_histograms_bracket_true_optima(jobs, m, data):
    q = data.draw(distributions(m))
    inst = Instance(tuple(jobs), m, q)
    eps = F(1, 2)
    step = eps ** 3
    sl = build_scenario_list(q)
    for obj, augment, rule, direction in (
        (Objective.makespan(), "min", LEFT, UPPER),
        (Objective.santa(), "max", RIGHT, LOWER),
    ):
        sol, _ = exact_solve(inst, obj)
        bag_sizes = sol.bags.bag_sizes(inst.jobs)
        opt = {k: exact_fixed_bags(bag_sizes, k, obj)[0] for k in sl.entries}
        reps = select_representatives(sl, step, augment)
        h = HistogramGuess(reps, tuple(opt[r] for r in reps), direction)
        for k in sl.entries:
            w = assign_scenario_bound(h, k, rule)
            assert w >= opt[k] if direction == UPPER else w <= opt[k]
        if direction == UPPER:
            area = sum(inst.prob(k) * (assign_scenario_bound(h, k, rule) - opt[k]) for k in sl.entries)
            total = sum(inst.prob(k) * opt[k] for k in sl.entries)
            assert area <= 3 * eps * total
