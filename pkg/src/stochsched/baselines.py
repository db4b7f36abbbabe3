"""Greedy and exact second-stage subroutines on bags."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import BagAssignment, Instance, Objective, ScenarioAssignment, scenario_key
from .oracle import BudgetExceeded, exact_fixed_bags


def list_schedule(bag_sizes: Sequence, k: int) -> ScenarioAssignment:
    """Greedy list scheduling in the given order.

    Each bag goes to a currently least-loaded machine, ties to the lowest
    index. The makespan is below ``sum / k + max`` (Graham).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    loads = [Fraction(0)] * k
    machine_of = []
    for s in bag_sizes:
        i = min(range(k), key=lambda x: (loads[x], x))
        loads[i] += Fraction(s)
        machine_of.append(i)
    return ScenarioAssignment(k, tuple(machine_of))


def lpt_bags(instance: Instance) -> BagAssignment:
    """Largest-first bag formation into ``m`` bags.

    Jobs are taken by decreasing size (ties by index) and each joins the
    currently smallest bag (ties by lowest bag index).
    """
    m = instance.m
    sizes = [Fraction(0)] * m
    bag_of = [0] * instance.n
    for j in sorted(range(instance.n), key=lambda j: (-instance.jobs[j], j)):
        b = min(range(m), key=lambda x: (sizes[x], x))
        sizes[b] += instance.jobs[j]
        bag_of[j] = b
    return BagAssignment(tuple(bag_of), m)


@dataclass(frozen=True)
class IdenticalResult:
    """Outcome of :func:`identical_machines_best`.

    ``key`` is the exact comparison key of the scenario; ``degraded`` is set
    when the exact search ran out of budget and list scheduling was used.
    """

    key: object
    assignment: ScenarioAssignment
    degraded: bool = False


def identical_machines_best(
    bag_sizes: Sequence, k: int, objective: Objective, node_limit: int | None = 10**6
) -> IdenticalResult:
    """Optimal assignment of bags to ``k`` identical machines.

    Falls back to :func:`list_schedule` (largest bag first) when the exact
    search exceeds ``node_limit``.
    """
    sizes = [Fraction(s) for s in bag_sizes]
    try:
        key, machine_of = exact_fixed_bags(sizes, k, objective, node_limit)
        return IdenticalResult(key, ScenarioAssignment(k, machine_of))
    except BudgetExceeded:
        order = sorted(range(len(sizes)), key=lambda b: (-sizes[b], b))
        greedy = list_schedule([sizes[b] for b in order], k)
        machine_of = [0] * len(sizes)
        for pos, b in enumerate(order):
            machine_of[b] = greedy.machine_of[pos]
        sa = ScenarioAssignment(k, tuple(machine_of))
        return IdenticalResult(scenario_key(sa.loads(sizes), objective), sa, degraded=True)
