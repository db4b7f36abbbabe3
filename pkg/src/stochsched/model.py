"""Problem and solution data model.

Jobs are packed into ``m`` bags before the number of machines ``k`` is known;
``k`` is drawn from the scenario distribution ``q`` over ``{1, ..., m}``.
Once ``k`` is revealed, whole bags are assigned to machines.

Indices are zero-based throughout: jobs ``0..n-1``, bags ``0..m-1`` and
machines ``0..k-1``. Scenario keys are machine counts ``k`` in ``1..m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ._numeric import as_fraction, nth_root_float

MAKESPAN = "makespan"
SANTA = "santa"
LPNORM = "lpnorm"
_KINDS = (MAKESPAN, SANTA, LPNORM)


class ValidationError(ValueError):
    """A solution or instance violates its structural invariants."""


class DomainError(ValueError):
    """An argument lies outside the operation's domain (e.g. a zero-probability scenario)."""


@dataclass(frozen=True)
class Instance:
    """Job sizes, bag count and scenario probabilities.

    ``q[k - 1]`` is the probability of facing ``k`` machines.
    """

    jobs: tuple[Fraction, ...]
    m: int
    q: tuple[Fraction, ...]
    name: str = ""

    def __post_init__(self):
        jobs = tuple(as_fraction(p) for p in self.jobs)
        q = tuple(as_fraction(x) for x in self.q)
        object.__setattr__(self, "jobs", jobs)
        object.__setattr__(self, "q", q)
        if not isinstance(self.m, int) or isinstance(self.m, bool):
            raise ValidationError("m must be an integer")
        if self.m < 2:
            raise ValidationError(f"m must be at least 2, got {self.m}")
        if len(jobs) < 1:
            raise ValidationError("an instance needs at least one job")
        if any(p <= 0 for p in jobs):
            raise ValidationError("job sizes must be positive")
        if len(q) != self.m:
            raise ValidationError(f"q has {len(q)} entries, expected m={self.m}")
        if any(x < 0 for x in q):
            raise ValidationError("probabilities must be nonnegative")
        if sum(q) != 1:
            raise ValidationError(f"probabilities sum to {sum(q)}, not exactly 1")

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def p_max(self) -> Fraction:
        return max(self.jobs)

    @property
    def total(self) -> Fraction:
        return sum(self.jobs, Fraction(0))

    @property
    def support(self) -> tuple[int, ...]:
        """Machine counts ``k`` with ``q_k > 0``, ascending."""
        return tuple(k for k in range(1, self.m + 1) if self.q[k - 1] > 0)

    def prob(self, k: int) -> Fraction:
        return self.q[k - 1]

    def with_q(self, q: Sequence) -> "Instance":
        return Instance(self.jobs, self.m, tuple(q), self.name)


@dataclass(frozen=True)
class Objective:
    """Which per-scenario objective is optimized.

    ``p`` is only meaningful for ``lpnorm`` and must exceed 1 there.
    """

    kind: str
    p: Fraction | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown objective {self.kind!r}")
        if self.kind == LPNORM:
            if self.p is None:
                raise ValueError("lpnorm needs an exponent p")
            p = as_fraction(self.p, allow_float=True)
            if p <= 1:
                raise ValueError(f"lpnorm exponent must exceed 1, got {p}")
            object.__setattr__(self, "p", p)
        else:
            object.__setattr__(self, "p", None)

    @classmethod
    def makespan(cls) -> "Objective":
        return cls(MAKESPAN)

    @classmethod
    def santa(cls) -> "Objective":
        return cls(SANTA)

    @classmethod
    def lpnorm(cls, p) -> "Objective":
        return cls(LPNORM, p)

    @property
    def minimize(self) -> bool:
        return self.kind != SANTA

    @property
    def integer_p(self) -> bool:
        return self.kind == LPNORM and self.p.denominator == 1

    def label(self) -> str:
        if self.kind == LPNORM:
            return f"lp{self.p}"
        return self.kind


@dataclass(frozen=True)
class BagAssignment:
    """Total map job -> bag."""

    bag_of: tuple[int, ...]
    m: int

    def __post_init__(self):
        object.__setattr__(self, "bag_of", tuple(int(b) for b in self.bag_of))
        for b in self.bag_of:
            if not 0 <= b < self.m:
                raise ValidationError(f"bag index {b} outside 0..{self.m - 1}")

    def bag_sizes(self, jobs: Sequence[Fraction]) -> list[Fraction]:
        sizes = [Fraction(0)] * self.m
        for j, b in enumerate(self.bag_of):
            sizes[b] += jobs[j]
        return sizes

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.m)]
        for j, b in enumerate(self.bag_of):
            out[b].append(j)
        return out

    @classmethod
    def from_bags(cls, bags: Iterable[Iterable[int]], n: int, m: int) -> "BagAssignment":
        bag_of = [-1] * n
        for b, members in enumerate(bags):
            for j in members:
                if bag_of[j] != -1:
                    raise ValidationError(f"job {j} appears in two bags")
                bag_of[j] = b
        if -1 in bag_of:
            raise ValidationError(f"job {bag_of.index(-1)} is not in any bag")
        return cls(tuple(bag_of), m)


@dataclass(frozen=True)
class ScenarioAssignment:
    """Total map bag -> machine for a scenario with ``k`` machines."""

    k: int
    machine_of: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "machine_of", tuple(int(i) for i in self.machine_of))
        if self.k < 1:
            raise ValidationError("a scenario needs at least one machine")
        for i in self.machine_of:
            if not 0 <= i < self.k:
                raise ValidationError(f"machine index {i} outside 0..{self.k - 1}")

    def loads(self, bag_sizes: Sequence[Fraction]) -> list[Fraction]:
        if len(bag_sizes) != len(self.machine_of):
            raise ValidationError("bag count does not match the assignment")
        loads = [Fraction(0)] * self.k
        for b, i in enumerate(self.machine_of):
            loads[i] += bag_sizes[b]
        return loads


@dataclass(frozen=True)
class TwoStageSolution:
    """A bag assignment plus one machine assignment per supported scenario."""

    bags: BagAssignment
    per_scenario: Mapping[int, ScenarioAssignment] = field(default_factory=dict)

    def __post_init__(self):
        ordered = {k: self.per_scenario[k] for k in sorted(self.per_scenario)}
        object.__setattr__(self, "per_scenario", ordered)
        for k, sa in ordered.items():
            if sa.k != k:
                raise ValidationError(f"scenario {k} holds an assignment for {sa.k} machines")
            if len(sa.machine_of) != self.bags.m:
                raise ValidationError(f"scenario {k} maps {len(sa.machine_of)} bags, expected {self.bags.m}")

    def validate(self, instance: Instance) -> None:
        if len(self.bags.bag_of) != instance.n:
            raise ValidationError("bag assignment does not cover every job")
        if self.bags.m != instance.m:
            raise ValidationError("bag count differs from the instance")
        if tuple(self.per_scenario) != instance.support:
            raise ValidationError(
                f"scenario assignments {tuple(self.per_scenario)} do not match support {instance.support}"
            )


def machine_loads(instance: Instance, solution: TwoStageSolution, k: int) -> list[Fraction]:
    """Machine loads (original sizes) in scenario ``k``."""
    if not 1 <= k <= instance.m or instance.prob(k) == 0:
        raise DomainError(f"scenario {k} is outside the support {instance.support}")
    if k not in solution.per_scenario:
        raise ValidationError(f"solution has no assignment for scenario {k}")
    sizes = solution.bags.bag_sizes(instance.jobs)
    return solution.per_scenario[k].loads(sizes)


def scenario_key(loads: Sequence, objective: Objective):
    """Exact comparison key of a load vector.

    Makespan: maximum load. Santa Claus: minimum load. Integer-``p`` norms:
    ``sum(W**p)`` as a Fraction; other exponents fall back to a float sum.
    """
    if objective.kind == MAKESPAN:
        return max(loads)
    if objective.kind == SANTA:
        return min(loads)
    if objective.integer_p:
        p = objective.p.numerator
        return sum((Fraction(w) ** p for w in loads), Fraction(0))
    pf = float(objective.p)
    return math.fsum(float(w) ** pf for w in loads)


def key_to_cost(key, objective: Objective):
    if objective.kind != LPNORM:
        return key
    return nth_root_float(key, objective.p)


def scenario_cost(loads: Sequence, objective: Objective):
    """Objective value of one scenario (float for the l_p norm)."""
    return key_to_cost(scenario_key(loads, objective), objective)


def expected_cost(instance: Instance, solution: TwoStageSolution, objective: Objective):
    """``sum_k q_k * cost_k`` over the support.

    Exact ``Fraction`` for makespan and Santa Claus; a float for the norm,
    whose per-scenario keys stay exact (see :func:`scenario_keys`).
    """
    solution.validate(instance)
    if objective.kind == LPNORM:
        return math.fsum(
            float(instance.prob(k)) * scenario_cost(machine_loads(instance, solution, k), objective)
            for k in instance.support
        )
    return sum(
        (instance.prob(k) * scenario_key(machine_loads(instance, solution, k), objective)
         for k in instance.support),
        Fraction(0),
    )


def scenario_keys(instance: Instance, solution: TwoStageSolution, objective: Objective) -> dict:
    """Exact per-scenario comparison keys."""
    solution.validate(instance)
    return {k: scenario_key(machine_loads(instance, solution, k), objective) for k in instance.support}


def is_better(a, b, objective: Objective, rel_tol: float = 0.0) -> bool:
    """True when expected cost ``a`` strictly beats ``b``.

    ``rel_tol`` only matters for float-valued (norm) costs, where two
    mathematically equal sums may differ in the last bits.
    """
    if b is None:
        return True
    if isinstance(a, float) or isinstance(b, float):
        slack = rel_tol * max(abs(float(a)), abs(float(b)))
        return float(a) < float(b) - slack if objective.minimize else float(a) > float(b) + slack
    return a < b if objective.minimize else a > b
