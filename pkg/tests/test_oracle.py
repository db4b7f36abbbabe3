import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochsched import BudgetExceeded, Instance, Objective, OracleBudget, exact_solve, expected_cost
from stochsched.model import scenario_key
from stochsched.oracle import exact_fixed_bags, restricted_growth_strings

from .conftest import OBJECTIVES, distributions, sizes


def _naive_scenario(bags, k, obj):
    keys = []
    for machine_of in itertools.product(range(k), repeat=len(bags)):
        loads = [Fraction(0)] * k
        for b, i in zip(bags, machine_of):
            loads[i] += b
        keys.append(scenario_key(loads, obj))
    return max(keys) if not obj.minimize else min(keys)


def _naive_two_stage(inst, obj):
    """Every job-to-bag map, every bag-to-machine map."""
    best = None
    for bag_of in itertools.product(range(inst.m), repeat=inst.n):
        sizes_ = [Fraction(0)] * inst.m
        for j, b in enumerate(bag_of):
            sizes_[b] += inst.jobs[j]
        keys = {k: _naive_scenario(sizes_, k, obj) for k in inst.support}
        if obj.p is None:
            value = sum(inst.prob(k) * keys[k] for k in inst.support)
        else:
            value = math.fsum(float(inst.prob(k)) * float(keys[k]) ** (1 / float(obj.p)) for k in inst.support)
        if best is None or (value < best if obj.minimize else value > best):
            best = value
    return best


def test_fixed_bags_examples():
    assert exact_fixed_bags([3, 3, 2, 2, 2], 2, Objective.makespan())[0] == 6
    assert exact_fixed_bags([3, 3, 2, 2, 2], 2, Objective.santa())[0] == 6
    assert exact_fixed_bags([7], 3, Objective.makespan())[0] == 7


def test_exact_solve_examples(tiny_instance):
    sol, cost = exact_solve(tiny_instance, Objective.makespan())
    assert cost == 6
    assert sorted(sorted(b) for b in sol.bags.members()) == [[0, 3], [1, 2]]

    _, cost = exact_solve(Instance((1, 1), 2, (0, 1)), Objective.makespan())
    assert cost == 1

    half = (Fraction(1, 2), Fraction(1, 2))
    _, cost = exact_solve(Instance((2, 2, 1, 1), 2, half), Objective.santa())
    assert cost == Fraction(9, 2)


def test_budget_is_explicit():
    inst = Instance(tuple(range(1, 12)), 2, (0, 1))
    with pytest.raises(BudgetExceeded):
        exact_solve(inst, Objective.makespan())
    with pytest.raises(BudgetExceeded):
        exact_solve(Instance((1, 2, 3), 2, (0, 1)), Objective.makespan(), OracleBudget(node_limit=2))
    with pytest.raises(BudgetExceeded):
        exact_fixed_bags([1] * 8, 3, Objective.makespan(), node_limit=5)


def test_restricted_growth_strings_count():
    # Stirling numbers of the second kind summed up to 3 blocks
    assert len(list(restricted_growth_strings(5, 3))) == 1 + 15 + 25
    assert list(restricted_growth_strings(2, 2)) == [(0, 0), (0, 1)]


@settings(max_examples=40)
@given(sizes(1, 5), st.integers(2, 3), st.data(), st.sampled_from(sorted(OBJECTIVES)))
def test_matches_naive_enumeration(jobs, m, data, name):
    obj = OBJECTIVES[name]
    inst = Instance(tuple(jobs), m, data.draw(distributions(m)))
    sol, cost = exact_solve(inst, obj)
    want = _naive_two_stage(inst, obj)
    assert math.isclose(float(cost), float(want), rel_tol=1e-9)
    assert expected_cost(inst, sol, obj) == cost


@settings(max_examples=60)
@given(sizes(1, 7), st.integers(2, 4), st.data(), st.sampled_from(["makespan", "lp2"]))
def test_optimum_between_pmax_and_n_pmax(jobs, m, data, name):
    obj = OBJECTIVES[name]
    inst = Instance(tuple(jobs), m, data.draw(distributions(m)))
    _, cost = exact_solve(inst, obj)
    assert float(inst.p_max) * (1 - 1e-12) <= float(cost) <= float(inst.n * inst.p_max) * (1 + 1e-12)
    if name == "makespan":
        top = max(inst.support)
        assert max(inst.p_max, inst.total / top) <= cost <= inst.total


@settings(max_examples=60)
@given(sizes(1, 7), st.integers(2, 4), st.data())
def test_santa_job_anchor(jobs, m, data):
    inst = Instance(tuple(jobs), m, data.draw(distributions(m)))
    sol, _ = exact_solve(inst, Objective.santa())
    bag_sizes = sol.bags.bag_sizes(inst.jobs)
    members = sol.bags.members()
    for k in inst.support:
        sa = sol.per_scenario[k]
        loads = sa.loads(bag_sizes)
        opt_k = min(loads)
        if opt_k == 0:
            continue
        ok = False
        for i, w in enumerate(loads):
            if w != opt_k:
                continue
            on_i = [j for b, js in enumerate(members) if sa.machine_of[b] == i for j in js]
            ok |= any(inst.jobs[j] <= opt_k <= inst.n * inst.jobs[j] for j in on_i)
        assert ok


@settings(max_examples=30)
@given(sizes(1, 6), st.integers(2, 3), st.data(), st.sampled_from(sorted(OBJECTIVES)))
def test_reevaluation_is_bit_exact(jobs, m, data, name):
    obj = OBJECTIVES[name]
    inst = Instance(tuple(jobs), m, data.draw(distributions(m)))
    sol, cost = exact_solve(inst, obj)
    again = expected_cost(inst, sol, obj)
    assert again == cost and type(again) is type(cost)
