"""Templates, configurations and the two-stage feasibility integer program.

A template is a multiset of rounded job sizes packed into one bag; a
configuration is a multiset of templates run on one machine of a given
scenario. The integer program decides how many bags of each template to
open (``y_t``) and how many machines of each representative scenario use
each configuration (``x_{c,kappa}``).

The feasibility solver is an exact depth-first search with bound
propagation over the box of every variable. When the program declares
blocks (the ``y`` block first, then one block per scenario), the search
branches over the first block only and solves the remaining blocks
independently at every leaf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .model import LPNORM, MAKESPAN, SANTA, Objective, ScenarioAssignment
from .rounding import OutOfGridError, RoundedInstance, RoundedSolution, SizeGrid, tight_allowed_size

AT_MOST = "at-most"
AT_LEAST = "at-least"
UNSCREENED = "unscreened"

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
BUDGET = "budget-exceeded"

FLOAT_MARGIN = 1e-9


class EnumerationBudgetExceeded(RuntimeError):
    """Template or configuration enumeration went past its ceiling."""


class InvariantViolation(AssertionError):
    """An extracted solution contradicts the feasible point it came from."""


@dataclass(frozen=True)
class Template:
    """Job counts per size class for one bag, with total and allowed size."""

    counts: tuple[int, ...]
    total: Fraction
    allowed: Fraction

    @property
    def n_jobs(self) -> int:
        return sum(self.counts)

    def classes(self) -> list[int]:
        out = []
        for cls, c in enumerate(self.counts):
            out.extend([cls] * c)
        return out


def enumerate_templates(
    size_classes: Sequence,
    counts: Sequence[int],
    total_cap,
    job_cap: int,
    grid: SizeGrid | None = None,
    ceiling: int = 200_000,
) -> list[Template]:
    """All nonempty count vectors ``t <= counts`` within both caps.

    Output is in lexicographic order of the count vectors. With a grid,
    templates whose total has no allowed size are skipped and ``allowed``
    is the tight allowed size; otherwise ``allowed == total``.
    """
    sizes = [Fraction(s) for s in size_classes]
    total_cap = Fraction(total_cap)
    if total_cap <= 0 or job_cap <= 0:
        raise ValueError("caps must be positive")
    L = len(sizes)
    out: list[Template] = []
    cur = [0] * L

    def rec(i: int, total: Fraction, jobs: int):
        if i == L:
            if jobs == 0:
                return
            if grid is not None:
                try:
                    allowed = tight_allowed_size(total, grid)
                except OutOfGridError:
                    return
            else:
                allowed = total
            out.append(Template(tuple(cur), total, allowed))
            if len(out) > ceiling:
                raise EnumerationBudgetExceeded(f"more than {ceiling} templates")
            return
        c = 0
        while c <= counts[i] and jobs + c <= job_cap and total + c * sizes[i] <= total_cap:
            cur[i] = c
            rec(i + 1, total + c * sizes[i], jobs + c)
            c += 1
        cur[i] = 0

    rec(0, Fraction(0), 0)
    return out


@dataclass(frozen=True)
class Configuration:
    """Sparse template counts ``((t, c_t), ...)`` with ``s(c)``."""

    items: tuple[tuple[int, int], ...]
    size: Fraction

    @property
    def n_templates(self) -> int:
        return sum(c for _, c in self.items)

    def dense(self, n_templates: int) -> tuple[int, ...]:
        out = [0] * n_templates
        for t, c in self.items:
            out[t] = c
        return tuple(out)

    def count(self, t: int) -> int:
        for tt, c in self.items:
            if tt == t:
                return c
        return 0


def screen_configurations(configs: Sequence[Configuration], bound, mode: str) -> list[Configuration]:
    """Keep the configurations passing the screen of ``mode`` against ``bound``."""
    if mode == UNSCREENED:
        return list(configs)
    bound = Fraction(bound)
    if mode == AT_MOST:
        return [c for c in configs if c.size <= bound]
    if mode == AT_LEAST:
        return [c for c in configs if c.size >= bound and (c.items or bound <= 0)]
    raise ValueError(f"unknown screening mode {mode!r}")


def pack_counts(limits: Sequence[int], vectors: Sequence[Sequence[int]]):
    """Pack count vectors into integers for fast limit checks.

    Returns ``(start, packed, guard)``: vectors are added one at a time,
    ``used = start + packed[i] + ...``, and the running sum stays within
    ``limits`` exactly when ``used & guard == 0``. Each class gets a bit
    field whose top bit is a guard that the field only reaches once its
    limit is exceeded. The check is exact as long as every addition starts
    from a sum that passed it and no entry exceeds twice the largest limit.
    """
    width = max([1] + [int(c).bit_length() for c in limits]) + 1
    guard = 0
    start = 0
    for cls, lim in enumerate(limits):
        shift = cls * (width + 1)
        guard |= 1 << (shift + width)
        start |= ((1 << width) - 1 - lim) << shift
    packed = [sum(c << (cls * (width + 1)) for cls, c in enumerate(v)) for v in vectors]
    return start, packed, guard


def enumerate_configurations(
    templates: Sequence[Template],
    template_cap: int,
    bound=None,
    mode: str = UNSCREENED,
    job_limit: Sequence[int] | None = None,
    max_templates: int | None = None,
    ceiling: int = 500_000,
) -> list[Configuration]:
    """Multisets of at most ``template_cap`` templates passing the screen.

    ``job_limit`` drops configurations whose combined job counts exceed the
    class counts (such a configuration can never appear in a feasible
    point). ``max_templates`` is a further implied cap on the number of
    templates. The empty configuration is kept except in ``at-least`` mode
    with a positive bound.
    """
    if template_cap <= 0:
        raise ValueError("template_cap must be positive")
    if mode not in (AT_MOST, AT_LEAST, UNSCREENED):
        raise ValueError(f"unknown screening mode {mode!r}")
    cap = template_cap if max_templates is None else min(template_cap, max_templates)
    limit = Fraction(bound) if bound is not None and mode == AT_MOST else None
    T = len(templates)
    items: list[list[int]] = []
    out: list[Configuration] = []

    packed_start = 0
    if job_limit is not None:
        packed_start, packed, guard = pack_counts(job_limit, [t.counts for t in templates])

    def rec(cands: list[int], used: int, size: Fraction, n: int):
        out.append(Configuration(tuple((t, c) for t, c in items), size))
        if len(out) > ceiling:
            raise EnumerationBudgetExceeded(f"more than {ceiling} configurations")
        if n >= cap:
            return
        for pos, i in enumerate(cands):
            t = templates[i]
            if limit is not None and size + t.allowed > limit:
                continue
            if items and items[-1][0] == i:
                items[-1][1] += 1
            else:
                items.append([i, 1])
            if job_limit is None:
                nused, nxt = used, cands[pos:]
            else:
                nused = used + packed[i]
                # templates that still fit next to the chosen ones
                nxt = [j for j in cands[pos:] if not (nused + packed[j]) & guard]
            rec(nxt, nused, size + t.allowed, n + 1)
            if items[-1][1] == 1:
                items.pop()
            else:
                items[-1][1] -= 1

    start = [i for i in range(T) if job_limit is None or not (packed_start + packed[i]) & guard]
    rec(start, packed_start, Fraction(0), 0)
    if mode == UNSCREENED:
        return out
    return screen_configurations(out, bound, mode)


def _exact(a):
    # plain ints stay ints so that integer rows evaluate quickly
    return a if type(a) is int or type(a) is Fraction else Fraction(a)


@dataclass(frozen=True)
class Row:
    """``sum coef * x_var  (sense)  rhs``; ``exact=False`` marks float rows."""

    coeffs: tuple[tuple[int, object], ...]
    sense: str
    rhs: object
    label: str = ""
    exact: bool = True

    def activity(self, point: Sequence[int]):
        if self.exact:
            # most variables of a point are zero
            return sum(a * point[v] for v, a in self.coeffs if point[v])
        return math.fsum(float(a) * point[v] for v, a in self.coeffs)

    def satisfied(self, point: Sequence[int]) -> bool:
        act = self.activity(point)
        if self.sense == "==":
            return act == self.rhs
        if self.sense == "<=":
            return act <= self.rhs
        return act >= self.rhs


@dataclass
class FeasibilityProgram:
    """Bounded nonnegative integer variables and linear rows.

    ``blocks`` optionally partitions the variables; rows may mix the first
    block with at most one other block. ``meta`` carries what extraction
    needs (templates, configurations, variable indices, targets).
    """

    names: list[str] = field(default_factory=list)
    upper: list[int] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    blocks: list[list[int]] | None = None
    meta: dict = field(default_factory=dict)

    def add_var(self, name: str, ub: int) -> int:
        if ub < 0:
            raise ValueError("upper bounds must be nonnegative")
        self.names.append(name)
        self.upper.append(int(ub))
        return len(self.names) - 1

    def add_row(self, coeffs, sense: str, rhs, label: str = "", exact: bool = True) -> None:
        if sense not in ("==", "<=", ">="):
            raise ValueError(f"unknown sense {sense!r}")
        merged: dict[int, object] = {}
        for v, a in coeffs:
            if not 0 <= v < len(self.names):
                raise ValueError(f"row {label!r} references undeclared variable {v}")
            a = _exact(a) if exact else float(a)
            merged[v] = merged[v] + a if v in merged else a
        cs = tuple((v, a) for v, a in sorted(merged.items()) if a != 0)
        self.rows.append(Row(cs, sense, _exact(rhs) if exact else float(rhs), label, exact))

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def is_feasible_point(self, point: Sequence[int]) -> bool:
        if len(point) != self.n_vars:
            return False
        if any(not 0 <= x <= u for x, u in zip(point, self.upper)):
            return False
        return all(r.satisfied(point) for r in self.rows)

    def to_text(self) -> str:
        """Plain LP-like dump, one constraint per line, rationals as ``num/den``."""

        def fmt(a) -> str:
            if isinstance(a, Fraction):
                return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
            return repr(a)

        lines = ["subject to"]
        for i, r in enumerate(self.rows):
            terms = " ".join(
                f"{'-' if a < 0 else '+'} {fmt(abs(a))} {self.names[v]}" for v, a in r.coeffs
            )
            label = r.label or f"r{i}"
            lines.append(f" {label}: {terms or '0'} {r.sense} {fmt(r.rhs)}")
        lines.append("bounds")
        for name, ub in zip(self.names, self.upper):
            lines.append(f" 0 <= {name} <= {ub}")
        lines.append("general")
        lines.append(" " + " ".join(self.names))
        lines.append("end")
        return "\n".join(lines) + "\n"


def _power(x: Fraction, p):
    p = Fraction(p)
    if p.denominator == 1:
        return x ** p.numerator
    return float(x) ** float(p)


def build_program(
    objective: Objective,
    templates: Sequence[Template],
    configurations: Mapping[int, Sequence[Configuration]],
    class_counts: Sequence[int],
    m: int,
    machines: Mapping[int, int] | None = None,
    bounds: Mapping[int, object] | None = None,
    huge_power=0,
) -> FeasibilityProgram:
    """Two-stage feasibility program.

    Rows: at most ``m`` bags, every class count covered exactly, every
    representative scenario ``kappa`` uses exactly ``machines[kappa]``
    configurations (``kappa`` itself by default), and configurations
    consume exactly the opened bags of each template. For the norm
    objective each scenario also gets ``sum s(c)**p x <= W**p - huge_power``;
    with a non-integer ``p`` that row is a float row whose right-hand side
    is shrunk by a relative margin of ``FLOAT_MARGIN``.
    """
    prog = FeasibilityProgram()
    T = len(templates)
    kappas = list(configurations)
    machines = dict(machines) if machines is not None else {k: k for k in kappas}
    powers: dict = {}

    def power(size):
        got = powers.get(size)
        if got is None:
            got = powers[size] = _power(size, objective.p)
        return got

    y = [prog.add_var(f"y_{t}", m) for t in range(T)]
    x: dict[int, list[int]] = {}
    for kappa in kappas:
        x[kappa] = [prog.add_var(f"x_{c}_{kappa}", machines[kappa]) for c in range(len(configurations[kappa]))]
    prog.blocks = [list(y)] + [list(x[k]) for k in kappas]

    prog.add_row([(v, 1) for v in y], "<=", m, "bags")
    for cls, n_l in enumerate(class_counts):
        prog.add_row([(y[t], tp.counts[cls]) for t, tp in enumerate(templates)], "==", n_l, f"jobs_{cls}")
    for kappa in kappas:
        confs = configurations[kappa]
        prog.add_row([(v, 1) for v in x[kappa]], "==", machines[kappa], f"machines_{kappa}")
        per_t: dict[int, list] = {t: [] for t in range(T)}
        for ci, conf in enumerate(confs):
            for t, c in conf.items:
                per_t[t].append((x[kappa][ci], c))
        for t in range(T):
            prog.add_row(per_t[t] + [(y[t], -1)], "==", 0, f"use_{t}_{kappa}")
        if objective.kind == LPNORM:
            W = Fraction(bounds[kappa])
            if objective.integer_p:
                rhs = _power(W, objective.p) - Fraction(huge_power)
                coeffs = [(x[kappa][ci], power(conf.size)) for ci, conf in enumerate(confs)]
                prog.add_row(coeffs, "<=", rhs, f"norm_{kappa}")
            else:
                rhs = (1 - FLOAT_MARGIN) * (_power(W, objective.p) - float(huge_power))
                coeffs = [(x[kappa][ci], power(conf.size)) for ci, conf in enumerate(confs)]
                prog.add_row(coeffs, "<=", rhs, f"norm_{kappa}", exact=False)

    prog.meta.update(
        objective=objective,
        templates=list(templates),
        configurations={k: list(v) for k, v in configurations.items()},
        machines=machines,
        bounds=dict(bounds) if bounds is not None else {},
        huge_power=huge_power,
        y=y,
        x=x,
        m=m,
        class_counts=tuple(class_counts),
    )
    return prog


@dataclass(frozen=True)
class FeasibilityResult:
    status: str
    point: tuple[int, ...] | None = None
    nodes: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


class _OutOfNodes(Exception):
    pass


def _scale_row(r: Row):
    """Integer-scale an exact row; float rows pass through."""
    if not r.exact:
        return ([(v, float(a)) for v, a in r.coeffs], r.sense, float(r.rhs), False)
    den = r.rhs.denominator
    for _, a in r.coeffs:
        if a.denominator != 1:
            den = math.lcm(den, a.denominator)
    return (
        [(v, a.numerator * (den // a.denominator)) for v, a in r.coeffs],
        r.sense,
        r.rhs.numerator * (den // r.rhs.denominator),
        True,
    )


def _localize(rows, variables: Sequence[int], fixed: Mapping[int, int]):
    """Re-index ``rows`` onto ``variables`` with every other variable fixed.

    Rows left without free variables are checked and dropped; returns
    ``None`` when one of them is violated.
    """
    index = {v: i for i, v in enumerate(variables)}
    out = []
    for cs, sense, rhs, exact in rows:
        const = 0
        terms = []
        for v, a in cs:
            i = index.get(v)
            if i is None:
                const += a * fixed[v]
            else:
                terms.append((i, a))
        r = rhs - const
        if not terms:
            if exact:
                ok = (r == 0) if sense == "==" else (r >= 0 if sense == "<=" else r <= 0)
            else:
                ok = (r >= -1e-12 * (abs(rhs) + 1)) if sense == "<=" else (
                    r <= 1e-12 * (abs(rhs) + 1) if sense == ">=" else abs(r) <= 1e-12 * (abs(rhs) + 1))
            if not ok:
                return None
            continue
        out.append((terms, sense, r, exact))
    return out


def _var_rows(n: int, rows) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(n)]
    for i, (cs, _, _, _) in enumerate(rows):
        for v, _ in cs:
            out[v].append(i)
    return out


def _propagate(lo, hi, rows, var_rows, start_rows) -> bool:
    """Tighten bounds row by row to a fixpoint; False on a wipe-out."""
    queue = list(start_rows)
    queued = set(queue)
    while queue:
        r = queue.pop()
        queued.discard(r)
        cs, sense, rhs, exact = rows[r]
        minact = 0
        maxact = 0
        for v, a in cs:
            if a > 0:
                minact += a * lo[v]
                maxact += a * hi[v]
            else:
                minact += a * hi[v]
                maxact += a * lo[v]
        tol = 0 if exact else 1e-12 * (abs(rhs) + 1)
        changed = []
        if sense != ">=":
            if minact > rhs + tol:
                return False
            if maxact > rhs:
                # raising a lower bound or lowering an upper one never moves minact
                for v, a in cs:
                    if lo[v] == hi[v]:
                        continue
                    slack = rhs - (minact - (a * lo[v] if a > 0 else a * hi[v]))
                    if a > 0:
                        nh = slack // a if exact else math.floor(slack / a + tol)
                        if nh < hi[v]:
                            hi[v] = nh
                            changed.append(v)
                    else:
                        nl = -((-slack) // a) if exact else math.ceil(slack / a - tol)
                        if nl > lo[v]:
                            lo[v] = nl
                            changed.append(v)
                    if lo[v] > hi[v]:
                        return False
        if sense != "<=" and not changed:
            if maxact < rhs - tol:
                return False
            if minact < rhs:
                for v, a in cs:
                    if lo[v] == hi[v]:
                        continue
                    need = rhs - (maxact - (a * hi[v] if a > 0 else a * lo[v]))
                    if a > 0:
                        nl = -((-need) // a) if exact else math.ceil(need / a - tol)
                        if nl > lo[v]:
                            lo[v] = nl
                            changed.append(v)
                    else:
                        nh = need // a if exact else math.floor(need / a + tol)
                        if nh < hi[v]:
                            hi[v] = nh
                            changed.append(v)
                    if lo[v] > hi[v]:
                        return False
        for v in changed:
            for rr in var_rows[v]:
                if rr not in queued:
                    queue.append(rr)
                    queued.add(rr)
    return True


def _rows_hold(point, rows) -> bool:
    for cs, sense, rhs, exact in rows:
        act = sum(a * point[v] for v, a in cs) if exact else math.fsum(a * point[v] for v, a in cs)
        if sense == "==" and act != rhs:
            return False
        if sense == "<=" and act > rhs:
            return False
        if sense == ">=" and act < rhs:
            return False
    return True


class _Search:
    """Depth-first search on a compact subproblem."""

    def __init__(self, node_limit: int | None):
        self.node_limit = node_limit
        self.nodes = 0

    def run(self, upper: Sequence[int], rows, hint: Sequence | None, leaf):
        """Search ``0 <= x <= upper`` subject to ``rows``.

        Variables are branched in index order, larger values first (the hint
        value, when given, goes first). ``leaf(point)`` returns a result or
        ``None`` to keep searching.
        """
        n = len(upper)
        lo = [0] * n
        hi = list(upper)
        vr = _var_rows(n, rows)
        if not _propagate(lo, hi, rows, vr, range(len(rows))):
            return None
        return self._dfs(lo, hi, 0, rows, vr, hint, leaf)

    def _dfs(self, lo, hi, start, rows, vr, hint, leaf):
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            raise _OutOfNodes
        n = len(lo)
        var = start
        while var < n and lo[var] == hi[var]:
            var += 1
        if var == n:
            if not _rows_hold(lo, rows):
                return None
            return leaf(lo)
        values = list(range(hi[var], lo[var] - 1, -1))
        if hint is not None and hint[var] is not None and lo[var] <= hint[var] <= hi[var]:
            values.remove(hint[var])
            values.insert(0, hint[var])
        for val in values:
            nlo = list(lo)
            nhi = list(hi)
            nlo[var] = nhi[var] = val
            if _propagate(nlo, nhi, rows, vr, vr[var]):
                got = self._dfs(nlo, nhi, var + 1, rows, vr, hint, leaf)
                if got is not None:
                    return got
        return None


def solve_feasibility(
    program: FeasibilityProgram,
    node_limit: int | None = 10**6,
    hint: Mapping[int, int] | None = None,
) -> FeasibilityResult:
    """Decide the program exactly within its variable box.

    Returns a feasible point, a proof-by-exhaustion ``infeasible`` status,
    or ``budget-exceeded`` when more than ``node_limit`` search nodes were
    needed. ``hint`` maps variables to values tried first.
    """
    n = program.n_vars
    rows = [_scale_row(r) for r in program.rows]
    hint = dict(hint or {})
    blocks = [list(b) for b in program.blocks] if program.blocks else None
    block_of = [0] * n
    if blocks:
        for b, vs in enumerate(blocks):
            for v in vs:
                block_of[v] = b
        if sorted(v for vs in blocks for v in vs) != list(range(n)):
            blocks = None
        else:
            for cs, _, _, _ in rows:
                if len({block_of[v] for v, _ in cs} - {0}) > 1:
                    blocks = None
                    break
    if not blocks:
        blocks = [list(range(n))]
        block_of = [0] * n

    first = blocks[0]
    ys = program.meta.get("y")
    templates = program.meta.get("templates")
    if ys is not None and templates is not None and sorted(ys) == sorted(first):
        # bags of larger templates first
        pos = {v: t for t, v in enumerate(ys)}
        first = sorted(first, key=lambda v: (-templates[pos[v]].allowed, pos[v]))
    stage0 = [r for r in rows if all(block_of[v] == 0 for v, _ in r[0])]
    by_block: dict[int, list] = {b: [] for b in range(1, len(blocks))}
    for r in rows:
        touched = {block_of[v] for v, _ in r[0]} - {0}
        if touched:
            by_block[touched.pop()].append(r)

    search = _Search(node_limit)

    def solve_block(b: int, fixed: dict):
        vs = blocks[b]
        both = dict(fixed)
        local = _localize(by_block[b], vs, both)
        if local is None:
            return None
        # a zero right-hand side with same-signed terms pins every term at 0
        zero = set()
        for terms, sense, r, exact in local:
            if not exact or r != 0:
                continue
            if (sense != ">=" and all(a > 0 for _, a in terms)) or (
                sense != "<=" and all(a < 0 for _, a in terms)
            ):
                zero.update(i for i, _ in terms)
        if zero:
            both.update({vs[i]: 0 for i in zero})
            vs = [v for i, v in enumerate(vs) if i not in zero]
            local = _localize(by_block[b], vs, both)
            if local is None:
                return None
        lo = [0] * len(vs)
        hi = [program.upper[v] for v in vs]
        vr = _var_rows(len(vs), local)
        if not _propagate(lo, hi, local, vr, range(len(local))):
            return None
        free = [i for i in range(len(vs)) if lo[i] < hi[i]]
        both.update({vs[i]: lo[i] for i in range(len(vs)) if lo[i] == hi[i]})
        sub = _localize(by_block[b], [vs[i] for i in free], both)
        if sub is None:
            return None
        h = [hint.get(vs[i]) for i in free]
        got = search.run([hi[i] for i in free], sub, h, lambda pt: list(pt))
        if got is None:
            return None
        both.update({vs[i]: got[j] for j, i in enumerate(free)})
        return {v: both[v] for v in blocks[b]}

    def leaf0(pt):
        fixed = {v: pt[i] for i, v in enumerate(first)}
        for b in range(1, len(blocks)):
            got = solve_block(b, fixed)
            if got is None:
                return None
            fixed.update(got)
        return fixed

    local0 = _localize(stage0, first, {})
    if local0 is None:
        return FeasibilityResult(INFEASIBLE, None, 0)
    try:
        result = search.run(
            [program.upper[v] for v in first], local0, [hint.get(v) for v in first], leaf0
        )
    except _OutOfNodes:
        return FeasibilityResult(BUDGET, None, search.nodes)
    if result is None:
        return FeasibilityResult(INFEASIBLE, None, search.nodes)
    point = tuple(result[v] for v in range(n))
    if not program.is_feasible_point(point):
        raise InvariantViolation("solver returned a point violating the program")
    return FeasibilityResult(FEASIBLE, point, search.nodes)


@dataclass
class ExtractionStats:
    """Counters of the per-representative bound checks done at extraction."""

    checks: int = 0
    violations: int = 0


def _allowed_cost_ok(loads, objective: Objective, bound, huge_power) -> bool:
    if objective.kind == MAKESPAN:
        return max(loads) <= bound
    if objective.kind == SANTA:
        return min(loads) >= bound
    W = Fraction(bound)
    if objective.integer_p:
        return sum((_power(w, objective.p) for w in loads), Fraction(0)) <= _power(W, objective.p) - huge_power
    total = math.fsum(_power(w, objective.p) for w in loads)
    return total <= (1 - FLOAT_MARGIN) * (_power(W, objective.p) - float(huge_power))


def extract_solution(
    point: Sequence[int],
    program: FeasibilityProgram,
    rounded: RoundedInstance,
    scenario_map: Mapping[int, int],
    shift: int = 0,
    stats: ExtractionStats | None = None,
) -> RoundedSolution:
    """Turn a feasible point into bags and per-scenario machine maps.

    Bags are opened template by template (``y_t`` copies each). Scenario
    ``k`` (a key of ``scenario_map``) reuses the machine map of its
    representative on ``k - shift`` machines; pinned bags take the last
    ``shift`` machines and unused bags go to machine 0. When the
    representative has more machines than ``k - shift``, bags of the
    surplus machines join the least loaded remaining machine.
    """
    meta = program.meta
    templates: list[Template] = meta["templates"]
    configs = meta["configurations"]
    objective: Objective = meta["objective"]
    m = meta["m"]
    if not program.is_feasible_point(point):
        raise InvariantViolation("extraction needs a feasible point")

    bag_classes: list[tuple[int, ...]] = []
    bag_template: list[int] = []
    for t, v in enumerate(meta["y"]):
        for _ in range(point[v]):
            bag_classes.append(tuple(templates[t].classes()))
            bag_template.append(t)
    n_ip = len(bag_classes)
    if n_ip > m:
        raise InvariantViolation(f"{n_ip} bags opened, limit {m}")
    placed = [0] * len(rounded.counts)
    for classes in bag_classes:
        for cls in classes:
            placed[cls] += 1
    if tuple(placed) != tuple(rounded.counts):
        raise InvariantViolation("opened bags do not hold every rounded job exactly once")
    allowed = [templates[t].allowed for t in bag_template]

    rep_maps: dict[int, list[int]] = {}
    for kappa, xs in meta["x"].items():
        pools: dict[int, list[int]] = {}
        for b, t in enumerate(bag_template):
            pools.setdefault(t, []).append(b)
        mach = [-1] * n_ip
        machine = 0
        for ci, v in enumerate(xs):
            for _ in range(point[v]):
                for t, c in configs[kappa][ci].items:
                    for _ in range(c):
                        mach[pools[t].pop(0)] = machine
                machine += 1
        if machine != meta["machines"][kappa] or any(i < 0 for i in mach):
            raise InvariantViolation(f"scenario {kappa}: configurations do not consume the bags")
        loads = [Fraction(0)] * machine
        for b, i in enumerate(mach):
            loads[i] += allowed[b]
        if stats is not None:
            stats.checks += 1
        if not _allowed_cost_ok(loads, objective, meta["bounds"].get(kappa), meta["huge_power"]):
            if stats is not None:
                stats.violations += 1
            raise InvariantViolation(f"scenario {kappa}: allowed-size cost misses its bound")
        rep_maps[kappa] = mach

    per_scenario = {}
    n_pinned = len(rounded.pinned)
    for k, rep in sorted(scenario_map.items()):
        avail = k - shift
        if avail < 1:
            raise InvariantViolation(f"scenario {k} has no machine left for the bags")
        mach = list(rep_maps[rep])
        loads = [Fraction(0)] * avail
        spill = []
        for b, i in enumerate(mach):
            if i < avail:
                loads[i] += allowed[b]
            else:
                spill.append(b)
        for b in spill:
            i = min(range(avail), key=lambda x: (loads[x], x))
            mach[b] = i
            loads[i] += allowed[b]
        full = mach + [avail + j for j in range(n_pinned)]
        full += [0] * (m + shift - len(full))
        per_scenario[k] = ScenarioAssignment(k, tuple(full))
    return RoundedSolution(tuple(bag_classes), per_scenario)
