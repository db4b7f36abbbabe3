"""Instance transformations shared by the three schemes.

Covers OPT-guess enumeration, merging of small jobs, geometric rounding of
job sizes, the arithmetic grids of allowed bag sizes, and lifting a
solution of the rounded instance back to the original jobs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._numeric import ceil_div, power_ceil, power_floor
from .model import BagAssignment, Instance, ScenarioAssignment, TwoStageSolution

UP = "up"
DOWN = "down"


class OutOfGridError(ValueError):
    """A bag total has no allowed size on the grid (the guess is wrong)."""


def check_epsilon(epsilon, min_inverse: int = 2) -> Fraction:
    """Return ``epsilon`` as a Fraction ``1/E`` with integer ``E >= min_inverse``."""
    eps = Fraction(epsilon)
    if eps <= 0 or eps.numerator != 1 or eps.denominator < min_inverse:
        raise ValueError(f"epsilon must be 1/E with integer E >= {min_inverse}, got {eps}")
    return eps


def opt_guess_candidates(instance_or_pmax, epsilon, n: int | None = None) -> list[Fraction]:
    """Powers of ``1 + epsilon`` covering ``[p_max, n * p_max]``.

    For every ``v`` in that interval some candidate lies in ``[v, (1+eps) v)``:
    the list runs from the smallest power ``>= p_max`` to the smallest power
    ``>= n * p_max``.
    """
    if isinstance(instance_or_pmax, Instance):
        p_max, n = instance_or_pmax.p_max, instance_or_pmax.n
    else:
        p_max = Fraction(instance_or_pmax)
        if n is None:
            raise TypeError("n is required when passing p_max directly")
    base = 1 + Fraction(epsilon)
    r_lo, v = power_ceil(p_max, base)
    r_hi, _ = power_ceil(n * p_max, base)
    out = []
    for _ in range(r_lo, r_hi + 1):
        out.append(v)
        v *= base
    return out


@dataclass(frozen=True)
class MergeResult:
    """Output of :func:`merge_small_jobs`.

    ``sizes[i]`` is the size of merged job ``i`` and ``groups[i]`` the
    original indices behind it. ``leftover`` is the single set-aside group
    (or ``None``), with total ``leftover_size``.
    """

    sizes: tuple[Fraction, ...]
    groups: tuple[tuple[int, ...], ...]
    leftover: tuple[int, ...] | None
    leftover_size: Fraction = Fraction(0)


def merge_small_jobs(jobs: Sequence, threshold, indices: Sequence[int] | None = None) -> MergeResult:
    """Unite the two smallest jobs of size ``<= threshold`` while two exist.

    A single remaining small job becomes the leftover. Output jobs are sorted
    by size, ties by smallest original index.
    """
    threshold = Fraction(threshold)
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if indices is None:
        indices = range(len(jobs))
    big: list[tuple[Fraction, tuple[int, ...]]] = []
    heap: list[tuple[Fraction, int, tuple[int, ...]]] = []
    for idx, p in zip(indices, jobs):
        p = Fraction(p)
        if p <= threshold:
            heap.append((p, idx, (idx,)))
        else:
            big.append((p, (idx,)))
    heapq.heapify(heap)
    while len(heap) >= 2:
        a = heapq.heappop(heap)
        b = heapq.heappop(heap)
        size = a[0] + b[0]
        group = tuple(sorted(a[2] + b[2]))
        if size <= threshold:
            heapq.heappush(heap, (size, group[0], group))
        else:
            big.append((size, group))
    leftover = None
    leftover_size = Fraction(0)
    if heap:
        leftover_size, _, leftover = heap[0]
    big.sort(key=lambda t: (t[0], t[1][0]))
    return MergeResult(
        tuple(s for s, _ in big), tuple(g for _, g in big), leftover, leftover_size
    )


def round_size(value, reference, epsilon, direction: str = UP) -> Fraction:
    """Round ``value`` to a neighbouring ``(1+eps)**r * reference``."""
    base = 1 + Fraction(epsilon)
    ratio = Fraction(value) / Fraction(reference)
    if direction == UP:
        _, v = power_ceil(ratio, base)
    elif direction == DOWN:
        _, v = power_floor(ratio, base)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return v * Fraction(reference)


def round_jobs_geometric(jobs: Sequence, reference, epsilon, direction: str = UP):
    """Geometric rounding of every job.

    Returns ``(size_classes, counts, class_of)``: distinct rounded sizes in
    ascending order, how many jobs fall in each, and the class of each input
    job.
    """
    rounded = [round_size(p, reference, epsilon, direction) for p in jobs]
    classes = sorted(set(rounded))
    pos = {v: i for i, v in enumerate(classes)}
    counts = [0] * len(classes)
    class_of = []
    for v in rounded:
        counts[pos[v]] += 1
        class_of.append(pos[v])
    return tuple(classes), tuple(counts), tuple(class_of)


@dataclass(frozen=True)
class SizeGrid:
    """Allowed bag sizes ``(eps + r * eps**2) * reference`` for ``r_min <= r <= r_max``, plus 0."""

    reference: Fraction
    epsilon: Fraction
    r_min: int
    r_max: int
    direction: str = UP
    includes_zero: bool = True

    def __post_init__(self):
        if self.r_min > self.r_max:
            raise ValueError("empty grid")
        if self.direction not in (UP, DOWN):
            raise ValueError(f"unknown direction {self.direction!r}")

    @property
    def step(self) -> Fraction:
        return self.epsilon ** 2 * self.reference

    def value(self, r: int) -> Fraction:
        return (self.epsilon + r * self.epsilon ** 2) * self.reference

    @property
    def minimum(self) -> Fraction:
        return self.value(self.r_min)

    @property
    def maximum(self) -> Fraction:
        return self.value(self.r_max)

    def values(self) -> list[Fraction]:
        vals = [self.value(r) for r in range(self.r_min, self.r_max + 1)]
        return ([Fraction(0)] if self.includes_zero else []) + vals

    def __contains__(self, x) -> bool:
        x = Fraction(x)
        if x == 0:
            return self.includes_zero
        r = (x / self.reference - self.epsilon) / self.epsilon ** 2
        return r.denominator == 1 and self.r_min <= r <= self.r_max


def makespan_grid(opt, epsilon) -> SizeGrid:
    """Upward grid anchored at the OPT guess, ``r = 0 .. (1+2eps)/eps**2 + 2``."""
    eps = Fraction(epsilon)
    r_max = (1 + 2 * eps) / eps ** 2 + 2
    return SizeGrid(Fraction(opt), eps, 0, int(r_max), UP)


def santa_grid(lb, ub, epsilon) -> SizeGrid:
    """Downward grid anchored at ``LB``, ``r >= -3`` and values at most ``3 * UB``."""
    eps = Fraction(epsilon)
    lb, ub = Fraction(lb), Fraction(ub)
    r_max = int((3 * ub / lb - eps) // eps ** 2)
    return SizeGrid(lb, eps, -3, r_max, DOWN)


def lp_grid(lb, ub, epsilon) -> SizeGrid:
    """Upward grid anchored at ``LB`` with values at most ``7 * UB``."""
    eps = Fraction(epsilon)
    lb, ub = Fraction(lb), Fraction(ub)
    r_max = int((7 * ub / lb - eps) // eps ** 2)
    return SizeGrid(lb, eps, 0, max(r_max, 0), UP)


def allowed_size(total, grid: SizeGrid) -> Fraction:
    """Allowed size of a bag whose contents sum to ``total``.

    ``0`` maps to ``0``; otherwise the smallest grid value ``>= total``
    (upward grids) or the largest ``<= total`` (downward grids).
    """
    total = Fraction(total)
    if total < 0:
        raise ValueError("bag totals are nonnegative")
    if total == 0:
        return Fraction(0)
    x = (total / grid.reference - grid.epsilon) / grid.epsilon ** 2
    if grid.direction == UP:
        r = max(ceil_div(x, Fraction(1)), grid.r_min)
        if r > grid.r_max:
            raise OutOfGridError(f"total {total} exceeds the grid maximum {grid.maximum}")
    else:
        r = min(x.numerator // x.denominator, grid.r_max)
        if r < grid.r_min:
            raise OutOfGridError(f"total {total} is below the grid minimum {grid.minimum}")
    return grid.value(r)


def tight_allowed_size(template_total, grid: SizeGrid) -> Fraction:
    """Allowed size of a tight bag: the least feasible grid value (upward) or
    the greatest (downward) for contents of the given total."""
    return allowed_size(template_total, grid)


@dataclass(frozen=True)
class RoundedInstance:
    """Jobs after merging and geometric rounding.

    ``members[l]`` lists the original-index groups rounded into class ``l``
    (one group per rounded job). ``pinned`` are groups that receive a bag of
    their own (huge jobs); ``leftover`` is the set-aside small group.
    """

    size_classes: tuple[Fraction, ...]
    counts: tuple[int, ...]
    members: tuple[tuple[tuple[int, ...], ...], ...]
    leftover: tuple[int, ...] | None
    leftover_size: Fraction
    grid: SizeGrid
    epsilon: Fraction
    pinned: tuple[tuple[int, ...], ...] = ()
    threshold: Fraction = Fraction(0)

    @property
    def total(self) -> Fraction:
        """Total rounded size (leftover and pinned groups excluded)."""
        return sum((c * s for c, s in zip(self.counts, self.size_classes)), Fraction(0))

    def key(self) -> tuple:
        return (self.size_classes, self.counts, self.grid)


def build_rounded_instance(
    instance: Instance,
    job_indices: Sequence[int],
    threshold,
    reference,
    epsilon,
    direction: str,
    grid: SizeGrid,
    pinned: Sequence[Sequence[int]] = (),
) -> RoundedInstance:
    """Merge small jobs among ``job_indices`` and round the rest geometrically."""
    merged = merge_small_jobs([instance.jobs[j] for j in job_indices], threshold, job_indices)
    classes, counts, class_of = round_jobs_geometric(merged.sizes, reference, epsilon, direction)
    members: list[list[tuple[int, ...]]] = [[] for _ in classes]
    for group, cls in zip(merged.groups, class_of):
        members[cls].append(group)
    return RoundedInstance(
        size_classes=classes,
        counts=counts,
        members=tuple(tuple(g) for g in members),
        leftover=merged.leftover,
        leftover_size=merged.leftover_size,
        grid=grid,
        epsilon=Fraction(epsilon),
        pinned=tuple(tuple(g) for g in pinned),
        threshold=Fraction(threshold),
    )


@dataclass(frozen=True)
class RoundedSolution:
    """Solution of a rounded instance.

    ``bag_classes[b]`` is the multiset of class indices packed in bag ``b``;
    pinned groups occupy the bags right after them and the remaining bags up
    to ``m`` are empty. ``per_scenario`` maps every bag to a machine.
    """

    bag_classes: tuple[tuple[int, ...], ...]
    per_scenario: dict = field(default_factory=dict)


def lift_solution(
    rounded_solution: RoundedSolution, rounded: RoundedInstance, instance: Instance
) -> TwoStageSolution:
    """Replace rounded jobs by their original groups.

    The leftover group joins the currently smallest nonempty bag (original
    sizes; lowest index on ties).
    """
    m = instance.m
    bags: list[list[int]] = []
    pools = [list(groups) for groups in rounded.members]
    for classes in rounded_solution.bag_classes:
        contents: list[int] = []
        for cls in classes:
            contents.extend(pools[cls].pop(0))
        bags.append(contents)
    if any(pools):
        raise ValueError("rounded solution leaves rounded jobs unassigned")
    for group in rounded.pinned:
        bags.append(list(group))
    if len(bags) > m:
        raise ValueError(f"{len(bags)} bags opened but only {m} exist")
    while len(bags) < m:
        bags.append([])
    if rounded.leftover is not None:
        sizes = [sum((instance.jobs[j] for j in b), Fraction(0)) for b in bags]
        nonempty = [b for b in range(m) if bags[b]]
        target = min(nonempty, key=lambda b: (sizes[b], b)) if nonempty else 0
        bags[target].extend(rounded.leftover)
    assignment = BagAssignment.from_bags(bags, instance.n, m)
    per = {
        k: sa if isinstance(sa, ScenarioAssignment) else ScenarioAssignment(k, tuple(sa))
        for k, sa in rounded_solution.per_scenario.items()
    }
    return TwoStageSolution(assignment, per)
