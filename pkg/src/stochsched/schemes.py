"""End-to-end approximation pipelines for the three objectives.

Every pipeline enumerates its guesses, rounds the instance, groups the
scenarios, searches for a feasible histogram of per-scenario bounds through
the integer program, extracts and lifts the solution, and finally evaluates
every candidate on the original instance. The best candidate wins, and the
largest-first bag baseline is always among the candidates.

Histogram search
----------------
The default ``frontier`` mode derives candidate histograms from the bag
multisets themselves: for every multiset ``y`` of templates covering the
rounded jobs, the least (greatest, for Santa Claus) feasible grid bound of
each representative scenario is computed exactly from the allowed bag
sizes. Feasibility of the program is monotone in every bound, so the
minimal such profiles are exactly the minimal feasible histograms. The
profiles with the best weighted sum are then decided by the integer program
with ``y`` as a search hint. ``exhaustive`` mode enumerates the bound grid
directly and is meant for tiny instances.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Sequence

from ._numeric import ceil_div, power_ceil, power_floor
from .baselines import identical_machines_best, list_schedule, lpt_bags
from .grouping import (
    LEFT,
    LOWER,
    NONINCREASING,
    RIGHT,
    UPPER,
    build_scenario_list,
    enumerate_bound_histograms,
    representative_of,
    representative_weights,
    select_representatives,
)
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
    scenario_keys,
)
from .oracle import BudgetExceeded, OracleBudget, exact_fixed_bags, exact_solve
from .rounding import (
    DOWN,
    UP,
    RoundedInstance,
    RoundedSolution,
    build_rounded_instance,
    check_epsilon,
    lift_solution,
    lp_grid,
    makespan_grid,
    opt_guess_candidates,
    santa_grid,
)
from .serialize import cost_out, report_dict
from .tcip import (
    AT_LEAST,
    AT_MOST,
    BUDGET,
    FEASIBLE,
    FLOAT_MARGIN,
    UNSCREENED,
    EnumerationBudgetExceeded,
    ExtractionStats,
    build_program,
    enumerate_configurations,
    enumerate_templates,
    extract_solution,
    pack_counts,
    solve_feasibility,
)

DEFAULT_EPSILON = Fraction(1, 5)
FRONTIER = "frontier"
EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class Budgets:
    """Work limits of a pipeline run.

    ``ip_nodes`` caps each feasibility search, ``exact_nodes`` each exact
    bag-to-machine search (beyond it list scheduling is used and the run is
    flagged). ``max_profiles`` is how many best histograms per guess are
    handed to the integer program.
    """

    ip_nodes: int = 10**6
    exact_nodes: int = 10**6
    template_ceiling: int = 200_000
    config_ceiling: int = 500_000
    partition_ceiling: int = 200_000
    max_profiles: int = 1
    histogram_mode: str = FRONTIER
    histogram_limit: int = 20_000

    def __post_init__(self):
        if self.histogram_mode not in (FRONTIER, EXHAUSTIVE):
            raise ValueError(f"unknown histogram mode {self.histogram_mode!r}")
        if min(self.ip_nodes, self.exact_nodes, self.max_profiles, self.histogram_limit) <= 0:
            raise ValueError("budgets must be positive")


@dataclass(frozen=True)
class SantaGuess:
    """One point of the Santa Claus guessing surface."""

    k_max: int
    LB: Fraction
    rho: Fraction
    k: int
    k_prime: int

    @property
    def UB(self) -> Fraction:
        return self.LB * self.rho


@dataclass(frozen=True)
class LpGuess:
    """One point of the norm guessing surface (``LB`` already rounded)."""

    opt_guess: Fraction
    opt_kmax: Fraction
    rho: Fraction
    k: int
    k_prime: int
    LB: Fraction

    @property
    def UB(self) -> Fraction:
        return self.LB * self.rho


@dataclass
class RunReport:
    """Result of a pipeline run.

    ``cost`` equals ``expected_cost(instance, solution, objective)``; it is a
    Fraction except for the norm objective, whose exact per-scenario keys are
    in ``keys``.
    """

    instance: Instance
    objective: Objective
    epsilon: Fraction
    method: str
    solution: TwoStageSolution
    cost: object
    keys: dict
    baseline_cost: object
    degraded: bool = False
    oracle_cost: object = None
    diagnostics: dict = field(default_factory=dict)
    elapsed_ms: float = 0.0

    @property
    def ratio(self) -> float | None:
        """Scheme cost over oracle cost (value over value for Santa Claus)."""
        if self.oracle_cost is None:
            return None
        if float(self.oracle_cost) == 0:
            return 1.0 if float(self.cost) == 0 else math.inf
        if isinstance(self.cost, float):
            return self.cost / float(self.oracle_cost)
        return float(Fraction(self.cost) / Fraction(self.oracle_cost))

    def to_dict(self, include_timing: bool = True) -> dict:
        """JSON-ready report; without timing two equal runs give equal dicts."""
        return report_dict(
            self.instance,
            self.objective,
            self.epsilon,
            self.method,
            self.solution,
            self.cost,
            self.diagnostics,
            self.elapsed_ms if include_timing else None,
            baseline_cost=cost_out(self.baseline_cost),
            oracle_cost=None if self.oracle_cost is None else cost_out(self.oracle_cost),
            ratio=self.ratio,
            degraded=self.degraded,
        )


class _Bundle:
    """A rounded instance with its templates and bag multisets."""

    def __init__(self, rounded: RoundedInstance, templates, partitions, bag_limit: int):
        self.rounded = rounded
        self.templates = templates
        self.partitions = partitions  # (y dense tuple, allowed sizes in grid steps, descending)
        step = rounded.grid.step
        self.units = [int(t.allowed / step) for t in templates]
        self.bag_limit = bag_limit
        self._configs: dict = {}

    def configurations(self, ceiling: int, max_templates: int | None = None):
        """Configurations of at most ``max_templates`` templates with their sizes in grid units."""
        cap = self.bag_limit if max_templates is None else min(max_templates, self.bag_limit)
        cap = max(cap, 1)
        hit = self._configs.get(cap)
        if hit is None:
            configs = enumerate_configurations(
                self.templates,
                template_cap=cap,
                job_limit=self.rounded.counts if self.templates else None,
                ceiling=ceiling,
            )
            tu = self.units
            units = [sum(c * tu[t] for t, c in conf.items) for conf in configs]
            hit = self._configs[cap] = (configs, units)
        return hit

    def screened(self, bound, mode: str, cap: int, ceiling: int):
        """Configurations passing the screen of ``mode``, compared in grid units."""
        configs, units = self.configurations(ceiling, cap)
        if mode == UNSCREENED:
            return list(configs)
        ratio = Fraction(bound) / self.rounded.grid.step
        if mode == AT_MOST:
            lim = math.floor(ratio)
            return [c for c, u in zip(configs, units) if u <= lim]
        lim = math.ceil(ratio)
        return [c for c, u in zip(configs, units) if u >= lim and c.items]


def _multiset_partitions(templates, units, counts, bag_limit: int, ceiling: int):
    """Bag multisets covering ``counts`` exactly with at most ``bag_limit`` bags.

    Blocks are generated in canonical order: each next block contains the
    smallest class still uncovered, and blocks sharing that class come in
    nondecreasing template order.
    """
    L = len(counts)
    by_min: list[list[int]] = [[] for _ in range(L)]
    for t, tp in enumerate(templates):
        first = next(i for i, c in enumerate(tp.counts) if c)
        by_min[first].append(t)
    remaining = list(counts)
    start, packed, guard = pack_counts(counts, [t.counts for t in templates])
    y = [0] * len(templates)
    chosen: list[int] = []
    out = []

    def rec(bags: int, used: int, last_cls: int, last_t: int):
        cls = next((i for i, c in enumerate(remaining) if c), None)
        if cls is None:
            sizes = sorted((units[t] for t in chosen), reverse=True)
            out.append((tuple(y), tuple(sizes)))
            if len(out) > ceiling:
                raise EnumerationBudgetExceeded(f"more than {ceiling} bag multisets")
            return
        if bags == bag_limit:
            return
        for t in by_min[cls]:
            if cls == last_cls and t < last_t:
                continue
            if (used + packed[t]) & guard:
                continue
            tc = templates[t].counts
            for i in range(L):
                remaining[i] -= tc[i]
            y[t] += 1
            chosen.append(t)
            rec(bags + 1, used + packed[t], cls, t)
            chosen.pop()
            y[t] -= 1
            for i in range(L):
                remaining[i] += tc[i]

    rec(0, start, -1, -1)
    return out


_SMALL_BAGS = 7


@lru_cache(maxsize=1 << 18)
def _small_key(sizes: tuple, k: int, objective: Objective):
    """Exact optimum for a handful of integer bag sizes (full enumeration).

    Pure in its arguments, so the cache is shared across runs.
    """
    kind = objective.kind
    p = objective.p
    if kind == LPNORM:
        pw = p.numerator if objective.integer_p else float(p)
    loads = [0] * k
    best = None

    def rec(i: int, opened: int):
        nonlocal best
        if i == len(sizes):
            if kind == MAKESPAN:
                key = max(loads)
            elif kind == SANTA:
                key = min(loads)
            elif objective.integer_p:
                key = sum(w ** pw for w in loads)
            else:
                key = math.fsum(float(w) ** pw for w in loads)
            if best is None or (key > best if kind == SANTA else key < best):
                best = key
            return
        for mach in range(min(opened, k - 1) + 1):
            loads[mach] += sizes[i]
            rec(i + 1, max(opened, mach + 1))
            loads[mach] -= sizes[i]

    rec(0, 0)
    return best


def _pareto_best(cands, minimize: bool, limit: int):
    """``cands``: (rank, index, profile). First ``limit`` undominated profiles by rank."""
    chosen = []
    for rank, idx, prof in sorted(cands, key=lambda c: (c[0], c[1])):
        dup = False
        for _, _, other in chosen:
            if minimize:
                dom = all(a <= b for a, b in zip(other, prof))
            else:
                dom = all(a >= b for a, b in zip(other, prof))
            if dom:
                dup = True
                break
        if not dup:
            chosen.append((rank, idx, prof))
            if len(chosen) >= limit:
                break
    return chosen


class _BoundScale:
    """Integer histogram entries of one guess.

    ``entry(kappa, key)`` maps an exact allowed-size optimum (in grid units)
    to the best feasible entry or ``None``; ``bound`` turns an entry into
    ``W_kappa``; ``grid`` lists all entries for exhaustive search.
    """

    def __init__(self, key, entry, bound, grid):
        self.key = key
        self.entry = entry
        self.bound = bound
        self.grid = grid
        self._floats: dict = {}

    def as_float(self, e) -> float:
        f = self._floats.get(e)
        if f is None:
            f = self._floats[e] = float(self.bound(e))
        return f


class _Engine:
    """Shared machinery: caches, candidate evaluation and the IP stage."""

    def __init__(self, instance: Instance, objective: Objective, epsilon, budgets: Budgets):
        self.instance = instance
        self.objective = objective
        self.eps = epsilon
        self.budgets = budgets
        self.best = None  # (cost, solution, label)
        self.bundles: dict = {}
        self.key_memo: dict = {}
        self.exact_memo: dict = {}
        self.seen_partitions: set = set()
        self.program_cache: dict = {}
        self.scales: dict = {}
        self.extraction = ExtractionStats()
        self.diag = {
            "guesses": 0,
            "guesses_equivalent": 0,
            "guesses_rejected": 0,
            "guesses_infeasible": 0,
            "guesses_feasible": 0,
            "guesses_budget": 0,
            "ip_solves": 0,
            "ip_feasible": 0,
            "ip_infeasible": 0,
            "ip_budget": 0,
            "ip_skipped_known_bags": 0,
            "shortcut_checks": 0,
            "shortcut_violations": 0,
            "degraded_subsolves": 0,
            "candidates": 0,
        }

    # ----- exact evaluation -------------------------------------------------
    def scenario_best(self, sizes: Sequence[Fraction], k: int):
        """Exact optimum for fixed bags (memoized on the sorted sizes)."""
        order = sorted(range(len(sizes)), key=lambda b: (-sizes[b], b))
        key = (tuple(sizes[b] for b in order), k)
        hit = self.exact_memo.get(key)
        if hit is None:
            res = identical_machines_best(key[0], k, self.objective, self.budgets.exact_nodes)
            if res.degraded:
                self.diag["degraded_subsolves"] += 1
            hit = (res.key, res.assignment.machine_of)
            self.exact_memo[key] = hit
        machine_of = [0] * len(sizes)
        for pos, b in enumerate(order):
            machine_of[b] = hit[1][pos]
        return hit[0], ScenarioAssignment(k, tuple(machine_of))

    def allowed_key(self, sizes: tuple, machines: int):
        """Exact optimum over allowed bag sizes given in grid steps.

        Keys are homogeneous in the sizes, so the search is shared by all
        guesses whose grids differ only by their reference value.
        """
        memo = (sizes, machines)
        hit = self.key_memo.get(memo)
        if hit is None:
            if len(sizes) <= _SMALL_BAGS:
                hit = _small_key(sizes, machines, self.objective)
            else:
                hit = exact_fixed_bags(sizes, machines, self.objective, self.budgets.exact_nodes)[0]
            self.key_memo[memo] = hit
        return hit

    def consider(self, solution: TwoStageSolution, label: str):
        cost = expected_cost(self.instance, solution, self.objective)
        self.diag["candidates"] += 1
        if self.best is None or is_better(cost, self.best[0], self.objective, rel_tol=1e-12):
            self.best = (cost, solution, label)
        return cost

    def polished(self, bags: BagAssignment) -> TwoStageSolution:
        sizes = bags.bag_sizes(self.instance.jobs)
        per = {k: self.scenario_best(sizes, k)[1] for k in self.instance.support}
        return TwoStageSolution(bags, per)

    def complete(self, partial: TwoStageSolution, filler: Callable) -> TwoStageSolution:
        sizes = partial.bags.bag_sizes(self.instance.jobs)
        per = dict(partial.per_scenario)
        for k in self.instance.support:
            if k not in per:
                per[k] = filler(k, sizes)
        return TwoStageSolution(partial.bags, per)

    @staticmethod
    def partition_key(bags: BagAssignment):
        return frozenset(frozenset(b) for b in bags.members() if b)

    # ----- rounded instances ------------------------------------------------
    def bundle(self, key, builder: Callable[[], tuple]):
        """Cached (rounded instance, templates, bag multisets)."""
        hit = self.bundles.get(key)
        if hit is None:
            rounded, total_cap, bag_limit = builder()
            if any(s > total_cap for s in rounded.size_classes):
                hit = None
            else:
                templates = enumerate_templates(
                    rounded.size_classes,
                    rounded.counts,
                    total_cap,
                    job_cap=sum(rounded.counts),
                    grid=rounded.grid,
                    ceiling=self.budgets.template_ceiling,
                ) if rounded.counts else []
                step = rounded.grid.step
                parts = _multiset_partitions(
                    templates, [int(t.allowed / step) for t in templates],
                    rounded.counts, bag_limit, self.budgets.partition_ceiling,
                )
                hit = _Bundle(rounded, templates, parts, bag_limit) if parts else None
            self.bundles[key] = hit if hit is not None else False
        return hit or None

    def witness_solution(self, bundle: _Bundle, y: Sequence[int]) -> BagAssignment:
        classes = []
        for t, c in enumerate(y):
            for _ in range(c):
                classes.append(tuple(bundle.templates[t].classes()))
        rsol = RoundedSolution(tuple(classes), {})
        return lift_solution(rsol, bundle.rounded, self.instance).bags

    # ----- integer-program stage ---------------------------------------------
    def ip_stage(
        self,
        bundle: _Bundle,
        slist,
        reps: tuple,
        rule: str,
        machines: dict,
        scale: "_BoundScale",
        mode: str,
        template_cap: int,
        huge_power,
        shift: int,
        filler: Callable,
    ) -> str:
        """Search histograms for one guess; returns the guess status.

        Histogram entries are integers mapped to bounds by ``scale``.
        """
        minimize = self.objective.minimize
        weights = representative_weights(slist, reps, rule)
        wvec = [weights[r] for r in reps]
        direction = UPPER if minimize else LOWER

        if self.budgets.histogram_mode == FRONTIER:
            cache_key = ("profiles", id(bundle), reps, tuple(machines[r] for r in reps), scale.key, tuple(wvec))
            chosen = self.program_cache.get(cache_key)
            if chosen is None:
                cands = []
                fw = [float(w) for w in wvec]
                for idx, (y, sizes) in enumerate(bundle.partitions):
                    prof = []
                    for r in reps:
                        e = scale.entry(r, self.allowed_key(sizes, machines[r]))
                        if e is None:
                            break
                        prof.append(e)
                    else:
                        rank = math.fsum(w * scale.as_float(e) for w, e in zip(fw, prof))
                        cands.append((rank if minimize else -rank, idx, tuple(prof)))
                chosen = _pareto_best(cands, minimize, self.budgets.max_profiles)
                self.program_cache[cache_key] = chosen
            attempts = [(prof, bundle.partitions[idx][0]) for _, idx, prof in chosen]
        else:
            attempts = []
            grids = [set(scale.grid(r)) for r in reps]
            hist_count = 0
            pool = []
            monotone = NONINCREASING if self.objective.kind != LPNORM else None
            for hist in enumerate_bound_histograms(reps, sorted(set().union(*grids)), monotone, direction):
                if any(b not in g for b, g in zip(hist.bounds, grids)):
                    continue
                hist_count += 1
                if hist_count > self.budgets.histogram_limit:
                    return BUDGET
                rank = math.fsum(float(w) * scale.as_float(e) for w, e in zip(wvec, hist.bounds))
                pool.append((rank if minimize else -rank, hist.bounds))
            pool.sort(key=lambda t: t[0])
            attempts = [(bounds, None) for _, bounds in pool]

        if not attempts:
            return "infeasible"
        status = "infeasible"
        for prof, y in attempts:
            bounds = {r: scale.bound(e) for r, e in zip(reps, prof)}
            if y is not None:
                known = self.partition_key(self.witness_solution(bundle, y))
                if known in self.seen_partitions:
                    self.diag["ip_skipped_known_bags"] += 1
                    status = FEASIBLE
                    continue
            try:
                configs = {}
                for r in reps:
                    cap = template_cap
                    if mode == AT_LEAST:
                        # every other machine needs a template of its own
                        cap = min(cap, bundle.bag_limit - machines[r] + 1)
                    configs[r] = bundle.screened(bounds[r], mode, cap, self.budgets.config_ceiling)
            except EnumerationBudgetExceeded:
                return BUDGET
            prog = build_program(
                self.objective, bundle.templates, configs, bundle.rounded.counts,
                bundle.bag_limit, machines={r: machines[r] for r in reps}, bounds=bounds,
                huge_power=huge_power,
            )
            hint = None
            if y is not None:
                hint = {v: y[t] for t, v in enumerate(prog.meta["y"])}
            self.diag["ip_solves"] += 1
            res = solve_feasibility(prog, self.budgets.ip_nodes, hint)
            if res.status == BUDGET:
                self.diag["ip_budget"] += 1
                status = BUDGET if status != FEASIBLE else status
                continue
            if not res.feasible:
                self.diag["ip_infeasible"] += 1
                continue
            self.diag["ip_feasible"] += 1
            scenario_map = {k: representative_of(reps, k, rule) for k in slist.entries}
            rsol = extract_solution(res.point, prog, bundle.rounded, scenario_map, shift, self.extraction)
            lifted = lift_solution(rsol, bundle.rounded, self.instance)
            full = self.complete(lifted, filler)
            self.consider(full, "eptas")
            self.seen_partitions.add(self.partition_key(full.bags))
            self.consider(self.polished(full.bags), "eptas")
            status = FEASIBLE
            if self.budgets.histogram_mode == EXHAUSTIVE:
                break
        return status

    def record(self, status: str):
        if status == FEASIBLE:
            self.diag["guesses_feasible"] += 1
        elif status == BUDGET:
            self.diag["guesses_budget"] += 1
        else:
            self.diag["guesses_infeasible"] += 1

    # ----- baseline / report --------------------------------------------------
    def baseline(self):
        bags = lpt_bags(self.instance)
        sol = self.polished(bags)
        cost = expected_cost(self.instance, sol, self.objective)
        return sol, cost

    def report(self, method_if_found: str, baseline_cost, started: float) -> RunReport:
        cost, sol, label = self.best
        # baseline-only: no guess produced a candidate at all
        degraded = method_if_found == "eptas" and self.diag["guesses_feasible"] == 0
        method = "baseline" if degraded else method_if_found
        diag = dict(self.diag)
        diag["extraction_checks"] = self.extraction.checks
        diag["extraction_violations"] = self.extraction.violations
        diag["selected"] = label
        return RunReport(
            instance=self.instance,
            objective=self.objective,
            epsilon=self.eps,
            method=method,
            solution=sol,
            cost=cost,
            keys=scenario_keys(self.instance, sol, self.objective),
            baseline_cost=baseline_cost,
            degraded=degraded,
            diagnostics=diag,
            elapsed_ms=(time.perf_counter() - started) * 1000.0,
        )


def _direct(engine: _Engine) -> TwoStageSolution:
    """One job per bag, exact second stage (used when ``n <= m``)."""
    inst = engine.instance
    bags = BagAssignment(tuple(range(inst.n)), inst.m)
    return engine.polished(bags)


def _start(instance: Instance, objective: Objective, epsilon, budgets):
    eps = check_epsilon(epsilon, 5)
    engine = _Engine(instance, objective, eps, budgets or Budgets())
    sol, cost = engine.baseline()
    engine.best = (cost, sol, "baseline")
    return engine, cost


def eptas_makespan(instance: Instance, epsilon=DEFAULT_EPSILON, budgets: Budgets | None = None) -> RunReport:
    """Expected-makespan scheme: guess OPT, round, group, decide the IP."""
    started = time.perf_counter()
    objective = Objective.makespan()
    engine, base_cost = _start(instance, objective, epsilon, budgets)
    eps = engine.eps
    if instance.n <= instance.m:
        engine.consider(_direct(engine), "direct")
        return engine.report("direct", base_cost, started)

    P = instance.total
    support = instance.support
    for O in opt_guess_candidates(instance, eps):
        engine.diag["guesses"] += 1
        # scenarios with 2*OPT <= eps*P/k are list scheduled on the final bags
        k_small = max((k for k in support if 2 * O * k <= eps * P), default=0)
        rest = [k for k in support if k > k_small]
        grid = makespan_grid(O, eps)

        def build(O=O, grid=grid):
            rounded = build_rounded_instance(
                instance, range(instance.n), eps ** 2 * O, O, eps, UP, grid
            )
            return rounded, grid.maximum, instance.m

        try:
            bundle = engine.bundle(("mk", O), build)
        except EnumerationBudgetExceeded:
            engine.record(BUDGET)
            continue
        if bundle is None:
            engine.diag["guesses_rejected"] += 1
            continue

        def shortcut(k, sizes, P=P):
            sa = list_schedule(sizes, k)
            engine.diag["shortcut_checks"] += 1
            if max(sa.loads(sizes)) >= (1 + eps) * P / k:
                engine.diag["shortcut_violations"] += 1
            return sa

        if not rest:
            y = bundle.partitions[0][0]
            bags = engine.witness_solution(bundle, y)
            sol = engine.complete(TwoStageSolution(bags, {}), shortcut)
            engine.consider(sol, "eptas")
            engine.consider(engine.polished(bags), "eptas")
            engine.record(FEASIBLE)
            continue

        slist = build_scenario_list(instance.q, (k_small + 1, instance.m))
        reps = select_representatives(slist, eps ** 3, augment="min")
        # bounds are positive multiples of eps^2 OPT up to 3 OPT / eps^2,
        # i.e. entries 1 .. 3 / eps^4 in units of the grid step
        step = bundle.rounded.grid.step
        top = int(3 / eps ** 4)
        scale = _BoundScale(
            ("mk", O),
            lambda r, key, top=top: max(key, 1) if key <= top else None,
            lambda e, step=step: e * step,
            lambda r, top=top: range(1, top + 1),
        )
        status = engine.ip_stage(
            bundle, slist, reps, LEFT, {r: r for r in reps}, scale, AT_MOST,
            int(3 / eps ** 3), 0, 0, shortcut,
        )
        engine.record(status)
    return engine.report("eptas", base_cost, started)


def santa_lb_candidates(instance: Instance, epsilon) -> list[Fraction]:
    """Powers of ``1 + eps`` in ``(p_j / (1+eps), n p_j]`` for some job ``j``."""
    base = 1 + Fraction(epsilon)
    out = set()
    for p in set(instance.jobs):
        r, v = power_ceil(p / base, base)
        if v == p / base:
            r, v = r + 1, v * base
        while v <= instance.n * p:
            out.add(v)
            v *= base
    return sorted(out)


def santa_guesses(instance: Instance, epsilon) -> list[SantaGuess]:
    """All guesses in lexicographic ``(k_max, LB, rho, k, k')`` order."""
    eps = Fraction(epsilon)
    E = eps.denominator
    support = instance.support
    out = []
    lbs = santa_lb_candidates(instance, eps)
    for k_max in support:
        for LB in lbs:
            for r in range(2, E + 2):
                rho = Fraction(E) ** r
                for k in [s for s in support if s <= k_max]:
                    for kp in [0] + [s for s in support if s < k]:
                        out.append(SantaGuess(k_max, LB, rho, k, kp))
    return out


def eptas_santa(instance: Instance, epsilon=DEFAULT_EPSILON, budgets: Budgets | None = None) -> RunReport:
    """Expected Santa Claus scheme."""
    started = time.perf_counter()
    objective = Objective.santa()
    engine, base_cost = _start(instance, objective, epsilon, budgets)
    eps = engine.eps
    if instance.n <= instance.m:
        engine.consider(_direct(engine), "direct")
        return engine.report("direct", base_cost, started)

    P = instance.total
    m = instance.m
    done: set = set()

    def filler(k, sizes):
        return engine.scenario_best(sizes, k)[1]

    for g in santa_guesses(instance, eps):
        engine.diag["guesses"] += 1
        UB = g.UB
        # guesses with UB >= P behave identically; k' only picks the exact subroutine
        eff_ub = min(UB, P)
        eff = (g.k_max, g.LB, eff_ub, g.k)
        if eff in done:
            engine.diag["guesses_equivalent"] += 1
            continue
        done.add(eff)
        huge = [j for j in range(instance.n) if instance.jobs[j] > UB]
        h = len(huge)
        if h > m - 1 or h >= g.k:
            engine.diag["guesses_rejected"] += 1
            continue
        rest = [j for j in range(instance.n) if instance.jobs[j] <= UB]
        if sum((instance.jobs[j] for j in rest), Fraction(0)) * 2 < (g.k_max - h) * g.LB:
            engine.diag["guesses_rejected"] += 1
            continue
        LB = g.LB
        grid = santa_grid(LB, UB, eps)

        def build(LB=LB, grid=grid, rest=rest, huge=huge, cap=3 * UB):
            rounded = build_rounded_instance(
                instance, rest, eps ** 2 * LB, LB, eps, DOWN, grid, pinned=[(j,) for j in huge]
            )
            return rounded, min(cap, grid.maximum), m - len(huge)

        try:
            bundle = engine.bundle(("santa", LB, eff_ub), build)
        except EnumerationBudgetExceeded:
            engine.record(BUDGET)
            continue
        if bundle is None:
            engine.diag["guesses_rejected"] += 1
            continue
        slist = build_scenario_list(instance.q, (g.k, g.k_max))
        reps = select_representatives(slist, eps ** 2 / g.rho * slist.total, augment="max")
        machines = {r: r - h for r in reps}
        # bounds are multiples of eps^2 LB in [LB/2, 2 UB); allowed sizes are
        # multiples of the same step, so the floor is the key itself
        step = bundle.rounded.grid.step
        lo_e = ceil_div(LB / 2, step)
        hi_e = ceil_div(2 * UB, step) - 1

        def entry(r, key, lo_e=lo_e, hi_e=hi_e):
            e = min(key, hi_e)
            return e if e >= lo_e else None

        scale = _BoundScale(
            ("santa", LB, eff_ub, h),
            entry,
            lambda e, step=step: e * step,
            lambda r, lo_e=lo_e, hi_e=hi_e: range(lo_e, hi_e + 1),
        )
        status = engine.ip_stage(
            bundle, slist, reps, RIGHT, machines, scale, AT_LEAST,
            int(3 * g.rho / eps), 0, h, filler,
        )
        engine.record(status)
    return engine.report("eptas", base_cost, started)


def _pow(x: Fraction, p: Fraction):
    return x ** p.numerator if p.denominator == 1 else float(x) ** float(p)


def _lp_scale(objective: Objective, base: Fraction, step: Fraction, H, cap_scale: Fraction, LB, key) -> _BoundScale:
    """Entries ``r`` with bounds ``(1+eps)**r``: the least power whose p-th
    power covers the allowed-size key plus the huge jobs, capped at
    ``cap_scale * kappa**(1/p)``."""
    p = objective.p
    memo: dict = {}
    if objective.integer_p:
        pi = p.numerator
        unit = step ** pi

        def entry(kappa, key_units):
            got = memo.get((kappa, key_units))
            if got is None:
                need = key_units * unit + H
                if need == 0:
                    r = power_floor(Fraction(LB), base)[0]
                else:
                    r = math.floor(math.log(float(need)) / (pi * math.log(float(base)))) - 1
                    while base ** (r * pi) < need:
                        r += 1
                    while base ** ((r - 1) * pi) >= need:
                        r -= 1
                ok = base ** (r * pi) <= cap_scale ** pi * kappa
                got = memo[(kappa, key_units)] = r if ok else False
            return got if got is not False else None
    else:
        pf = float(p)
        unit = float(step) ** pf
        lb = math.log(float(base))

        def entry(kappa, key_units):
            got = memo.get((kappa, key_units))
            if got is None:
                key = key_units * unit
                need = key / (1 - FLOAT_MARGIN) + float(H)
                r = math.floor(math.log(max(need, 1e-300)) / (pf * lb)) - 1
                while (1 - FLOAT_MARGIN) * (float(base ** r) ** pf - float(H)) < key:
                    r += 1
                ok = float(base ** r) <= float(cap_scale) * kappa ** (1 / pf)
                got = memo[(kappa, key_units)] = r if ok else False
            return got if got is not False else None

    def grid(kappa):
        r0, _ = power_floor(Fraction(LB), base)
        out = []
        r = r0
        hi = float(cap_scale) * kappa ** (1 / float(p))
        while float(base ** r) <= hi:
            out.append(r)
            r += 1
        return out

    return _BoundScale(key, entry, lambda r: base ** r, grid)


def lp_lower_bound(opt_kmax, k_max: int, p, epsilon) -> Fraction:
    """``opt_kmax / k_max**(1/p)`` rounded down to a power of ``1 + eps``."""
    base = 1 + Fraction(epsilon)
    p = Fraction(p)
    opt_kmax = Fraction(opt_kmax)
    est = float(opt_kmax) / k_max ** (1 / float(p))
    r, v = power_floor(Fraction(est), base)
    # exact correction: largest v with v**p * k_max <= opt_kmax**p
    if p.denominator == 1:
        while _pow(v * base, p) * k_max <= _pow(opt_kmax, p):
            v *= base
        while _pow(v, p) * k_max > _pow(opt_kmax, p):
            v /= base
    return v


def lp_guesses(instance: Instance, epsilon, p) -> list[LpGuess]:
    """All guesses in lexicographic ``(OPT, opt_kmax, rho, k, k')`` order."""
    eps = Fraction(epsilon)
    E = eps.denominator
    support = instance.support
    k_max = support[-1]
    out = []
    for O in opt_guess_candidates(instance, eps):
        for ell in range(1, E + 2):
            okm = ell * eps * O
            LB = lp_lower_bound(okm, k_max, p, eps)
            for r in range(2, E * E + 2):
                rho = Fraction(E) ** r
                for k in support:
                    for kp in [0] + [s for s in support if s < k]:
                        out.append(LpGuess(O, okm, rho, k, kp, LB))
    return out


def eptas_lp(instance: Instance, epsilon=DEFAULT_EPSILON, p=2, budgets: Budgets | None = None) -> RunReport:
    """Expected l_p-norm scheme."""
    started = time.perf_counter()
    objective = Objective.lpnorm(p)
    p = objective.p
    engine, base_cost = _start(instance, objective, epsilon, budgets)
    eps = engine.eps
    if instance.n <= instance.m:
        engine.consider(_direct(engine), "direct")
        return engine.report("direct", base_cost, started)

    P = instance.total
    m = instance.m
    support = instance.support
    k_max = support[-1]
    done: set = set()
    base = 1 + eps

    def filler(k, sizes):
        return engine.scenario_best(sizes, k)[1]

    for g in lp_guesses(instance, eps, p):
        engine.diag["guesses"] += 1
        LB, UB = g.LB, g.UB
        eff_ub = UB if UB < P else P
        eff = (LB, eff_ub, g.k)
        if eff in done:
            engine.diag["guesses_equivalent"] += 1
            continue
        done.add(eff)
        huge = [j for j in range(instance.n) if instance.jobs[j] > 2 * UB]
        h = len(huge)
        if h > g.k - 1:
            engine.diag["guesses_rejected"] += 1
            continue
        rest = [j for j in range(instance.n) if instance.jobs[j] <= 2 * UB]
        H = sum((_pow(instance.jobs[j], p) for j in huge), Fraction(0) if objective.integer_p else 0.0)
        grid = lp_grid(LB, eff_ub, eps)

        def build(LB=LB, grid=grid, rest=rest, huge=huge):
            rounded = build_rounded_instance(
                instance, rest, eps ** 2 * LB, LB, eps, UP, grid, pinned=[(j,) for j in huge]
            )
            return rounded, grid.maximum, m - len(huge)

        try:
            bundle = engine.bundle(("lp", LB, eff_ub, tuple(huge)), build)
        except EnumerationBudgetExceeded:
            engine.record(BUDGET)
            continue
        if bundle is None:
            engine.diag["guesses_rejected"] += 1
            continue
        slist = build_scenario_list(instance.q, (g.k, k_max))
        reps = select_representatives(slist, eps ** 2 / g.rho, augment="min")
        machines = {r: r - h for r in reps}
        step = bundle.rounded.grid.step
        skey = ("lp", LB, eff_ub, tuple(huge))
        scale = engine.scales.get(skey)
        if scale is None:
            scale = engine.scales[skey] = _lp_scale(objective, base, step, H, 2 * base * eff_ub, LB, skey)
        status = engine.ip_stage(
            bundle, slist, reps, LEFT, machines, scale, UNSCREENED,
            int(4 * g.rho / eps), H, h, filler,
        )
        engine.record(status)
    return engine.report("eptas", base_cost, started)


def solve(
    instance: Instance,
    objective: Objective,
    epsilon=DEFAULT_EPSILON,
    budgets: Budgets | None = None,
    oracle: OracleBudget | None = None,
) -> RunReport:
    """Dispatch to the matching pipeline; optionally attach the oracle optimum."""
    if objective.kind == MAKESPAN:
        rep = eptas_makespan(instance, epsilon, budgets)
    elif objective.kind == SANTA:
        rep = eptas_santa(instance, epsilon, budgets)
    else:
        rep = eptas_lp(instance, epsilon, objective.p, budgets)
    if oracle is not None:
        try:
            _, rep.oracle_cost = exact_solve(instance, objective, oracle)
        except BudgetExceeded as exc:
            rep.diagnostics["oracle"] = str(exc)
    return rep
