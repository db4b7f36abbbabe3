from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from stochsched import Objective

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# lines recorded by the acceptance tests, echoed in the terminal summary
ACCEPTANCE: list[str] = []

OBJECTIVES = {
    "makespan": Objective.makespan(),
    "santa": Objective.santa(),
    "lp2": Objective.lpnorm(2),
    "lp3": Objective.lpnorm(3),
}


def sizes(min_size=1, max_size=8):
    """Positive rational job sizes with small denominators."""
    frac = st.builds(Fraction, st.integers(1, 40), st.integers(1, 4))
    return st.lists(frac, min_size=min_size, max_size=max_size)


@st.composite
def distributions(draw, m: int):
    weights = draw(st.lists(st.integers(0, 3), min_size=m, max_size=m))
    if sum(weights) == 0:
        weights[-1] = 1
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


def box_feasible(program) -> bool:
    """Independent feasibility check: scan the whole variable box.

    Rows are scaled to integers and evaluated on numpy blocks, so boxes of
    a few hundred million points stay tractable.
    """
    n = program.n_vars
    rows = []
    for r in program.rows:
        den = 1
        for a in [r.rhs] + [a for _, a in r.coeffs]:
            den = np.lcm(den, Fraction(a).denominator)
        rows.append(([(v, int(a * den)) for v, a in r.coeffs], r.sense, int(r.rhs * den)))
    extents = [u + 1 for u in program.upper]
    split, tail_points = n, 1
    while split > 0 and tail_points * extents[split - 1] <= 200_000:
        split -= 1
        tail_points *= extents[split]
    if split < n:
        tail = np.indices(extents[split:]).reshape(n - split, -1)
    else:
        tail = np.zeros((0, 1), dtype=np.int64)
    for head in itertools.product(*[range(e) for e in extents[:split]]):
        ok = np.ones(tail.shape[1], dtype=bool)
        for coeffs, sense, rhs in rows:
            act = np.zeros(tail.shape[1], dtype=np.int64)
            for v, a in coeffs:
                act += a * (head[v] if v < split else tail[v - split])
            if sense == "==":
                ok &= act == rhs
            elif sense == "<=":
                ok &= act <= rhs
            else:
                ok &= act >= rhs
        if ok.any():
            return True
    return False


@pytest.fixture
def tiny_instance():
    from stochsched import Instance

    return Instance((3, 2, 2, 1), 2, (Fraction(1, 2), Fraction(1, 2)), "tiny")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
