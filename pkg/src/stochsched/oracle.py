"""Exact brute-force solver for desk-scale instances.

Bag partitions are enumerated as restricted-growth strings (block ``b`` of
a string is bag ``b``), which removes bag-relabeling symmetry. For a fixed
set of bags, every scenario is solved by a depth-first search over
canonical bag-to-machine maps: the first bag goes to machine 0 and each
later bag may open at most one new machine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .model import (
    LPNORM,
    MAKESPAN,
    SANTA,
    BagAssignment,
    Instance,
    Objective,
    ScenarioAssignment,
    TwoStageSolution,
    expected_cost,
    is_better,
    key_to_cost,
    scenario_key,
)


class BudgetExceeded(RuntimeError):
    """An exhaustive search would exceed its configured budget."""


@dataclass(frozen=True)
class OracleBudget:
    max_jobs: int = 10
    max_bags: int = 5
    node_limit: int = 10**8

    def __post_init__(self):
        if min(self.max_jobs, self.max_bags, self.node_limit) <= 0:
            raise ValueError("budget caps must be positive")


class _Counter:
    __slots__ = ("nodes", "limit")

    def __init__(self, limit: int | None):
        self.nodes = 0
        self.limit = limit

    def tick(self, amount: int = 1) -> None:
        self.nodes += amount
        if self.limit is not None and self.nodes > self.limit:
            raise BudgetExceeded(f"node limit {self.limit} exceeded")


def restricted_growth_strings(n: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    """Yield all restricted-growth strings of length ``n`` using at most
    ``max_blocks`` distinct values, in lexicographic order."""
    if n == 0:
        yield ()
        return
    a = [0] * n
    # prefix_max[i] = max(a[0..i])
    prefix_max = [0] * n

    def rec(i: int):
        if i == n:
            yield tuple(a)
            return
        top = min(prefix_max[i - 1] + 1, max_blocks - 1)
        for v in range(top + 1):
            a[i] = v
            prefix_max[i] = max(prefix_max[i - 1], v)
            yield from rec(i + 1)

    a[0] = 0
    prefix_max[0] = 0
    yield from rec(1)


def _greedy_incumbent(sizes: Sequence[Fraction], k: int) -> list[int]:
    loads = [Fraction(0)] * k
    out = []
    for s in sizes:
        i = min(range(k), key=lambda x: (loads[x], x))
        loads[i] += s
        out.append(i)
    return out


def _partial_key(loads, objective: Objective):
    return scenario_key(loads, objective)


def exact_fixed_bags(
    bag_sizes: Sequence,
    k: int,
    objective: Objective,
    node_limit: int | None = None,
    *,
    _counter: _Counter | None = None,
):
    """Optimal second stage for fixed bags on ``k`` identical machines.

    Returns ``(key, machine_of)`` where ``key`` is the exact comparison key of
    :func:`stochsched.model.scenario_key` (the scenario cost itself for
    makespan and Santa Claus, ``sum(W**p)`` for integer-``p`` norms).

    Raises :class:`BudgetExceeded` rather than returning a partial answer.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    sizes = [Fraction(s) for s in bag_sizes]
    if not sizes:
        raise ValueError("bag_sizes must be nonempty")
    counter = _counter if _counter is not None else _Counter(node_limit)
    b = len(sizes)
    if k == 1:
        counter.tick(b)
        return scenario_key([sum(sizes, Fraction(0))], objective), (0,) * b

    order = sorted((i for i in range(b) if sizes[i] > 0), key=lambda i: (-sizes[i], i))
    ordered = [sizes[i] for i in order]
    r = len(ordered)
    if r == 0:
        counter.tick(b)
        return scenario_key([Fraction(0)] * k, objective), (0,) * b

    suffix = [Fraction(0)] * (r + 1)
    for i in range(r - 1, -1, -1):
        suffix[i] = suffix[i + 1] + ordered[i]

    inc = _greedy_incumbent(ordered, k)
    loads0 = [Fraction(0)] * k
    for s, i in zip(ordered, inc):
        loads0[i] += s
    best_key = scenario_key(loads0, objective)
    best = list(inc)

    kind = objective.kind
    loads = [Fraction(0)] * k
    assign = [0] * r

    def better(key):
        return key < best_key if kind != SANTA else key > best_key

    def rec(i: int, opened: int):
        nonlocal best_key, best
        if i == r:
            key = scenario_key(loads, objective)
            if better(key):
                best_key = key
                best = list(assign)
            return
        s = ordered[i]
        top = min(opened, k - 1)
        for mach in range(top + 1):
            counter.tick()
            loads[mach] += s
            assign[i] = mach
            if kind == MAKESPAN:
                prune = loads[mach] >= best_key
            elif kind == LPNORM:
                prune = _partial_key(loads, objective) >= best_key
            else:
                rest = suffix[i + 1]
                prune = min(loads) + rest <= best_key
                if not prune and max(opened, mach + 1) + (r - i - 1) < k:
                    # too few bags left to cover every machine
                    prune = True
            if not prune:
                rec(i + 1, max(opened, mach + 1))
            loads[mach] -= s

    rec(0, 0)
    machine_of = [0] * b
    for pos, idx in enumerate(order):
        machine_of[idx] = best[pos]
    return best_key, tuple(machine_of)


def exact_solve(instance: Instance, objective: Objective, budget: OracleBudget | None = None):
    """Exact two-stage optimum.

    Returns ``(solution, cost)`` with ``cost == expected_cost(instance, solution, objective)``.
    Ties go to the lexicographically smallest restricted-growth string.
    """
    budget = budget or OracleBudget()
    if instance.n > budget.max_jobs:
        raise BudgetExceeded(f"n={instance.n} exceeds the oracle cap of {budget.max_jobs} jobs")
    if instance.m > budget.max_bags:
        raise BudgetExceeded(f"m={instance.m} exceeds the oracle cap of {budget.max_bags} bags")
    counter = _Counter(budget.node_limit)
    support = instance.support
    probs = {k: instance.prob(k) for k in support}
    memo: dict = {}
    jobs = instance.jobs
    m = instance.m

    best_value = None
    best_rgs = None
    best_maps = None
    for rgs in restricted_growth_strings(instance.n, m):
        counter.tick()
        sizes = [Fraction(0)] * m
        for j, blk in enumerate(rgs):
            sizes[blk] += jobs[j]
        order = sorted(range(m), key=lambda i: (-sizes[i], i))
        sorted_sizes = tuple(sizes[i] for i in order)
        keys = {}
        maps = {}
        for k in support:
            hit = memo.get((sorted_sizes, k))
            if hit is None:
                hit = exact_fixed_bags(sorted_sizes, k, objective, _counter=counter)
                memo[(sorted_sizes, k)] = hit
            key, mo = hit
            keys[k] = key
            machine_of = [0] * m
            for pos, bag in enumerate(order):
                machine_of[bag] = mo[pos]
            maps[k] = machine_of
        if objective.kind == LPNORM:
            value = math.fsum(float(probs[k]) * key_to_cost(keys[k], objective) for k in support)
        else:
            value = sum((probs[k] * keys[k] for k in support), Fraction(0))
        if best_value is None or is_better(value, best_value, objective, rel_tol=1e-12):
            best_value, best_rgs, best_maps = value, rgs, maps

    solution = TwoStageSolution(
        BagAssignment(best_rgs, m),
        {k: ScenarioAssignment(k, tuple(best_maps[k])) for k in support},
    )
    return solution, expected_cost(instance, solution, objective)
