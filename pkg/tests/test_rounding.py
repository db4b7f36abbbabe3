import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochsched import Instance, Objective, expected_cost
from stochsched.rounding import (
    DOWN,
    UP,
    OutOfGridError,
    RoundedInstance,
    RoundedSolution,
    SizeGrid,
    allowed_size,
    build_rounded_instance,
    check_epsilon,
    lift_solution,
    makespan_grid,
    merge_small_jobs,
    opt_guess_candidates,
    round_jobs_geometric,
    round_size,
    tight_allowed_size,
)

from .conftest import sizes

F = Fraction
EPS = F(1, 5)


def test_guess_candidates_examples():
    assert opt_guess_candidates(4, 1, n=4) == [4, 8, 16]
    assert opt_guess_candidates(3, EPS, n=1) == [F(6, 5) ** 7]
    assert opt_guess_candidates(1, F(1, 2), n=10) == [1, F(3, 2), F(9, 4), F(27, 8), F(81, 16), F(243, 32), F(729, 64)]


def test_guess_candidates_from_instance():
    inst = Instance((4, 1, 1, 1), 2, (0, 1))
    assert opt_guess_candidates(inst, 1) == [4, 8, 16]


@given(st.builds(F, st.integers(1, 50), st.integers(1, 7)), st.integers(1, 12), st.sampled_from([2, 5, 10]))
def test_guess_candidates_cover_interval(p_max, n, E):
    eps = F(1, E)
    cands = opt_guess_candidates(p_max, eps, n=n)
    assert cands[0] >= p_max and cands[0] < (1 + eps) * p_max
    assert cands[-1] >= n * p_max
    for v in (p_max, n * p_max, (p_max + n * p_max) / 2):
        assert any(v <= c < (1 + eps) * v for c in cands)


def test_check_epsilon():
    assert check_epsilon("1/5", 5) == EPS
    for bad in (F(1, 4), F(2, 11), 0, F(-1, 7)):
        with pytest.raises(ValueError):
            check_epsilon(bad, 5)


def test_merge_examples():
    res = merge_small_jobs([F(2, 5), F(3, 10), F(3, 10), 5], 1)
    assert res.sizes == (5,)
    assert res.leftover_size == 1 and sorted(res.leftover) == [0, 1, 2]

    res = merge_small_jobs([F(3, 5), F(3, 5), 5], 1)
    assert res.sizes == (F(6, 5), 5) and res.leftover is None
    assert res.groups == ((0, 1), (2,))

    res = merge_small_jobs([5], 1)
    assert res.sizes == (5,) and res.leftover is None


@given(sizes(0, 10), st.builds(F, st.integers(1, 20), st.integers(1, 4)))
def test_merge_accounts_for_every_job(jobs, threshold):
    res = merge_small_jobs(jobs, threshold)
    seen = sorted(j for g in res.groups for j in g) + sorted(res.leftover or ())
    assert sorted(seen) == list(range(len(jobs)))
    for s, g in zip(res.sizes, res.groups):
        assert s == sum(F(jobs[j]) for j in g)
        assert s > threshold
    if res.leftover is not None:
        assert 0 < res.leftover_size <= threshold


def test_round_size_examples():
    assert round_size(1, 1, EPS, UP) == 1
    assert round_size(F(13, 10), 1, F(1, 2), UP) == F(3, 2)
    assert round_size(F(13, 10), 1, F(1, 2), DOWN) == 1
    assert round_size(F(13, 10) * 7, 7, F(1, 2), UP) == F(21, 2)


@given(sizes(1, 10), st.builds(F, st.integers(1, 9), st.integers(1, 3)), st.sampled_from([2, 5, 10]))
def test_rounding_direction(jobs, reference, E):
    eps = F(1, E)
    classes, counts, class_of = round_jobs_geometric(jobs, reference, eps, UP)
    assert sum(counts) == len(jobs)
    assert all(classes[c] >= p and classes[c] < (1 + eps) * p for p, c in zip(jobs, class_of))
    classes, counts, class_of = round_jobs_geometric(jobs, reference, eps, DOWN)
    assert all(classes[c] <= p and classes[c] * (1 + eps) > p for p, c in zip(jobs, class_of))
    span = max(jobs) / min(jobs)
    bound = math.ceil(math.log(float(span) * (1 + 1e-12), 1 + 1 / E)) + 1 if span > 1 else 1
    assert len(set(round_jobs_geometric(jobs, reference, eps, UP)[0])) <= bound + 1


@given(st.lists(st.integers(1, 10_000), min_size=1, max_size=40))
def test_makespan_class_count(raw):
    eps, opt = EPS, F(1)
    # jobs spread over (eps^2 OPT, (1+eps) OPT]
    jobs = [eps ** 2 * opt + F(r, 10_000) * (1 + eps - eps ** 2) * opt for r in raw]
    classes, _, _ = round_jobs_geometric(jobs, opt, eps, UP)
    assert len(classes) <= 2 / eps ** 3 - 1


def test_allowed_size_examples():
    R = F(7)
    up = SizeGrid(R, F(1, 10), 0, 1000, UP)
    down = SizeGrid(R, F(1, 10), 0, 1000, DOWN)
    assert allowed_size(F(373, 1000) * R, up) == F(38, 100) * R
    assert allowed_size(F(373, 1000) * R, down) == F(37, 100) * R
    assert allowed_size(0, up) == 0
    with pytest.raises(OutOfGridError):
        allowed_size(100 * R, up)
    with pytest.raises(OutOfGridError):
        allowed_size(F(1, 100) * R, down)


def test_tight_allowed_size_examples():
    R = F(3)
    grid = makespan_grid(R, EPS)
    assert tight_allowed_size(EPS * R, grid) == EPS * R
    assert tight_allowed_size(EPS ** 2 * R, grid) == EPS * R
    assert tight_allowed_size(0, grid) == 0


@given(st.builds(F, st.integers(1, 400), st.integers(1, 50)))
def test_bag_size_within_allowed_band(total):
    R = F(5)
    grid = makespan_grid(R, EPS)
    if total > grid.maximum:
        return
    a = allowed_size(total, grid)
    assert a in grid and a >= total
    assert a <= max(EPS * R, total + EPS ** 2 * R)
    # a tight bag is never more than 1/eps times too large
    assert a <= total / EPS or total < EPS ** 2 * R


def test_grid_membership():
    grid = makespan_grid(1, EPS)
    vals = grid.values()
    assert vals[0] == 0 and all(a < b for a, b in zip(vals, vals[1:]))
    assert grid.maximum == EPS + (int((1 + 2 * EPS) / EPS ** 2) + 2) * EPS ** 2
    assert F(1, 3) not in grid


def _rounded(members, classes, leftover=None, leftover_size=F(0), pinned=()):
    return RoundedInstance(
        size_classes=tuple(classes),
        counts=tuple(len(g) for g in members),
        members=tuple(tuple(g) for g in members),
        leftover=leftover,
        leftover_size=leftover_size,
        grid=makespan_grid(10, EPS),
        epsilon=EPS,
        pinned=pinned,
    )


def test_lift_identity():
    inst = Instance((3, 2), 2, (0, 1))
    rounded = _rounded([[(1,)], [(0,)]], [2, 3])
    sol = lift_solution(RoundedSolution(((1,), (0,)), {2: (0, 1)}), rounded, inst)
    assert sol.bags.bag_of == (0, 1)
    assert sol.per_scenario[2].machine_of == (0, 1)


def test_lift_leftover_joins_smallest_bag():
    inst = Instance((4, 6, F(1, 10)), 2, (0, 1))
    rounded = _rounded([[(0,)], [(1,)]], [4, 6], leftover=(2,), leftover_size=F(1, 10))
    sol = lift_solution(RoundedSolution(((1,), (0,))), rounded, inst)
    assert sol.bags.bag_of == (1, 0, 1)


def test_lift_merged_pair_stays_together():
    inst = Instance((5, 1, 1, F(3, 5), F(3, 5)), 2, (0, 1))
    rounded = _rounded([[(3, 4), (1,), (2,)], [(0,)]], [1, 5])
    sol = lift_solution(RoundedSolution(((0,), (0, 0, 1))), rounded, inst)
    assert sol.bags.bag_of[3] == sol.bags.bag_of[4] == 0


@given(sizes(2, 8), st.integers(2, 4))
def test_lift_round_trip_and_cost(jobs, m):
    inst = Instance(tuple(jobs), m, (0,) * (m - 1) + (1,))
    opt = max(inst.p_max, inst.total / m)
    grid = makespan_grid(4 * opt, EPS)
    rounded = build_rounded_instance(inst, range(inst.n), EPS ** 2 * opt, opt, EPS, UP, grid)
    # rounded jobs round-robin over the bags
    flat = [c for c, n in enumerate(rounded.counts) for _ in range(n)]
    bag_classes = [tuple(flat[b::m]) for b in range(m)]
    machine_of = tuple(range(m))
    sol = lift_solution(RoundedSolution(tuple(bag_classes), {m: machine_of}), rounded, inst)
    assert sorted(j for b in sol.bags.members() for j in b) == list(range(inst.n))
    rounded_loads = [sum((rounded.size_classes[c] for c in bc), F(0)) for bc in bag_classes]
    bound = max(rounded_loads) + rounded.leftover_size
    assert expected_cost(inst, sol, Objective.makespan()) <= bound
