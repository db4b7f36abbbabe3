import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochsched import (
    BagAssignment,
    DomainError,
    Instance,
    Objective,
    ScenarioAssignment,
    TwoStageSolution,
    ValidationError,
    expected_cost,
)
from stochsched.model import machine_loads, scenario_cost, scenario_key
from stochsched.oracle import exact_fixed_bags

from .conftest import distributions, sizes


def _two_bags(jobs, bags, q):
    inst = Instance(jobs, len(bags), q)
    ba = BagAssignment.from_bags(bags, inst.n, inst.m)
    per = {k: ScenarioAssignment(k, tuple(min(b, k - 1) for b in range(inst.m))) for k in inst.support}
    return inst, TwoStageSolution(ba, per)


def test_loads_split():
    inst, sol = _two_bags((3, 2, 2, 1), [[0, 3], [1, 2]], (Fraction(1, 2), Fraction(1, 2)))
    assert machine_loads(inst, sol, 2) == [4, 4]
    assert machine_loads(inst, sol, 1) == [8]


def test_loads_uneven():
    inst, sol = _two_bags((5, 1, 1), [[0], [1, 2]], (0, 1))
    assert machine_loads(inst, sol, 2) == [5, 2]


def test_loads_outside_support():
    inst, sol = _two_bags((5, 1, 1), [[0], [1, 2]], (0, 1))
    with pytest.raises(DomainError):
        machine_loads(inst, sol, 1)
    with pytest.raises(DomainError):
        machine_loads(inst, sol, 3)


def test_scenario_costs():
    assert scenario_cost([4, 4], Objective.makespan()) == 4
    assert scenario_cost([3, 3], Objective.santa()) == 3
    lp = Objective.lpnorm(2)
    assert scenario_key([3, 1], lp) == 10
    assert math.isclose(scenario_cost([3, 1], lp), math.sqrt(10), rel_tol=1e-12)


def test_noninteger_exponent_is_float():
    lp = Objective.lpnorm(Fraction(3, 2))
    assert not lp.integer_p
    assert math.isclose(scenario_cost([4, 1], lp), (8 + 1) ** (2 / 3), rel_tol=1e-12)


def test_expected_cost_examples():
    inst, sol = _two_bags((3, 2, 2, 1), [[0, 3], [1, 2]], (Fraction(1, 2), Fraction(1, 2)))
    assert expected_cost(inst, sol, Objective.makespan()) == 6
    inst, sol = _two_bags((5, 1, 1), [[0], [1, 2]], (0, 1))
    assert expected_cost(inst, sol, Objective.makespan()) == 5
    inst, sol = _two_bags((2, 2, 1, 1), [[0, 2], [1, 3]], (0, 1))
    assert expected_cost(inst, sol, Objective.santa()) == 3


def test_missing_scenario_rejected():
    inst = Instance((1, 1), 2, (Fraction(1, 2), Fraction(1, 2)))
    sol = TwoStageSolution(BagAssignment((0, 1), 2), {2: ScenarioAssignment(2, (0, 1))})
    with pytest.raises(ValidationError):
        expected_cost(inst, sol, Objective.makespan())


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(jobs=(1,), m=1, q=(1,)),
        dict(jobs=(), m=2, q=(0, 1)),
        dict(jobs=(0, 1), m=2, q=(0, 1)),
        dict(jobs=(1,), m=2, q=(Fraction(1, 2), Fraction(1, 3))),
        dict(jobs=(1,), m=2, q=(2, -1)),
        dict(jobs=(1,), m=2, q=(1,)),
    ],
)
def test_instance_validation(kwargs):
    with pytest.raises(ValidationError):
        Instance(**kwargs)


def test_objective_validation():
    with pytest.raises(ValueError):
        Objective.lpnorm(1)
    with pytest.raises(ValueError):
        Objective("median")
    assert Objective.lpnorm("5/2").p == Fraction(5, 2)


def test_assignment_validation():
    with pytest.raises(ValidationError):
        BagAssignment((0, 2), 2)
    with pytest.raises(ValidationError):
        ScenarioAssignment(2, (0, 2))
    with pytest.raises(ValidationError):
        BagAssignment.from_bags([[0], [0, 1]], 2, 2)
    with pytest.raises(ValidationError):
        TwoStageSolution(BagAssignment((0, 1), 2), {2: ScenarioAssignment(1, (0, 0))})


@st.composite
def _solutions(draw):
    jobs = draw(sizes(1, 7))
    m = draw(st.integers(2, 4))
    q = draw(distributions(m))
    inst = Instance(tuple(jobs), m, q)
    bag_of = draw(st.lists(st.integers(0, m - 1), min_size=inst.n, max_size=inst.n))
    per = {}
    for k in inst.support:
        per[k] = ScenarioAssignment(k, tuple(draw(st.lists(st.integers(0, k - 1), min_size=m, max_size=m))))
    return inst, TwoStageSolution(BagAssignment(tuple(bag_of), m), per)


@given(_solutions())
def test_loads_sum_to_total(case):
    inst, sol = case
    for k in inst.support:
        assert sum(machine_loads(inst, sol, k)) == inst.total


@given(_solutions(), st.sampled_from(["makespan", "santa", "lp2"]))
def test_expected_cost_linear_in_q(case, name):
    inst, sol = case
    obj = {"makespan": Objective.makespan(), "santa": Objective.santa(), "lp2": Objective.lpnorm(2)}[name]
    for k in inst.support:
        point = tuple(Fraction(int(i == k - 1)) for i in range(inst.m))
        single = inst.with_q(point)
        only_k = TwoStageSolution(sol.bags, {k: sol.per_scenario[k]})
        got = expected_cost(single, only_k, obj)
        want = scenario_cost(machine_loads(inst, sol, k), obj)
        assert math.isclose(float(got), float(want), rel_tol=1e-12)


@given(sizes(1, 6), st.sampled_from([2, 3, Fraction(5, 2)]))
def test_norm_between_max_and_scaled_max(loads, p):
    obj = Objective.lpnorm(p)
    top = float(max(loads))
    norm = float(scenario_cost(loads, obj))
    assert top * (1 - 1e-12) <= norm <= len(loads) ** (1 / float(p)) * top * (1 + 1e-12)


@given(sizes(1, 6), st.sampled_from(["makespan", "santa", "lp2"]))
def test_per_scenario_optimum_monotone_in_k(bags, name):
    obj = {"makespan": Objective.makespan(), "santa": Objective.santa(), "lp2": Objective.lpnorm(2)}[name]
    keys = [exact_fixed_bags(bags, k, obj)[0] for k in range(1, 5)]
    assert all(a >= b for a, b in zip(keys, keys[1:]))
