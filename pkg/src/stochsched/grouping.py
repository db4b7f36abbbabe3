"""Linear grouping of per-scenario objective bounds.

Scenarios with positive probability are laid out as consecutive bars of
width ``q_k`` on ``[0, Q)``. Representatives are the scenarios whose bar
contains an integer multiple of a step; every other scenario copies the
bound of a neighbouring representative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from ._numeric import ceil_div
from .model import DomainError

UPPER = "upper"
LOWER = "lower"
LEFT = "left"
RIGHT = "right"
NONINCREASING = "nonincreasing"
NONDECREASING = "nondecreasing"


@dataclass(frozen=True)
class ScenarioList:
    """Supported scenarios of an index range with their prefix masses.

    ``prefix[i]`` is ``Q`` of ``entries[i]`` and ``before[i]`` is ``Q'``.
    """

    entries: tuple[int, ...]
    probs: tuple[Fraction, ...]
    prefix: tuple[Fraction, ...]
    before: tuple[Fraction, ...]

    @property
    def total(self) -> Fraction:
        return self.prefix[-1]

    def Q(self, kappa: int) -> Fraction:
        return self.prefix[self.entries.index(kappa)]

    def Q_before(self, kappa: int) -> Fraction:
        return self.before[self.entries.index(kappa)]

    def __len__(self) -> int:
        return len(self.entries)


def build_scenario_list(q: Sequence, index_range: tuple[int, int] | None = None) -> ScenarioList:
    """Scenarios ``k`` in ``index_range`` (inclusive, 1-based) with ``q_k > 0``."""
    m = len(q)
    lo, hi = index_range if index_range is not None else (1, m)
    if lo < 1 or hi > m:
        raise DomainError(f"index range [{lo}, {hi}] outside 1..{m}")
    entries, probs, prefix, before = [], [], [], []
    acc = Fraction(0)
    for k in range(lo, hi + 1):
        qk = Fraction(q[k - 1])
        if qk > 0:
            entries.append(k)
            probs.append(qk)
            before.append(acc)
            acc += qk
            prefix.append(acc)
    if not entries:
        raise DomainError(f"no scenario with positive probability in [{lo}, {hi}]")
    return ScenarioList(tuple(entries), tuple(probs), tuple(prefix), tuple(before))


def select_representatives(slist: ScenarioList, step, augment: str | None = None) -> tuple[int, ...]:
    """Scenarios whose bar ``[Q', Q)`` contains an integer multiple of ``step``.

    ``augment`` adds the minimum (``"min"``) or maximum (``"max"``) listed
    scenario when it was not selected, so that the copy rules always find a
    representative.
    """
    step = Fraction(step)
    if step <= 0:
        raise ValueError("step must be positive")
    chosen = []
    for k, lo, hi in zip(slist.entries, slist.before, slist.prefix):
        first = ceil_div(lo, step) * step
        if first < hi:
            chosen.append(k)
    if augment == "min" and slist.entries[0] not in chosen:
        chosen.insert(0, slist.entries[0])
    elif augment == "max" and slist.entries[-1] not in chosen:
        chosen.append(slist.entries[-1])
    elif augment not in (None, "min", "max"):
        raise ValueError(f"unknown augmentation {augment!r}")
    return tuple(chosen)


def representative_of(representatives: Sequence[int], kappa: int, rule: str) -> int:
    """Representative used by scenario ``kappa``.

    ``left``: the largest representative ``<= kappa``. ``right``: the
    smallest representative ``>= kappa``.
    """
    if rule == LEFT:
        cands = [r for r in representatives if r <= kappa]
        if not cands:
            raise DomainError(f"no representative at or below scenario {kappa}")
        return max(cands)
    if rule == RIGHT:
        cands = [r for r in representatives if r >= kappa]
        if not cands:
            raise DomainError(f"no representative at or above scenario {kappa}")
        return min(cands)
    raise ValueError(f"unknown copy rule {rule!r}")


def representative_weights(slist: ScenarioList, representatives: Sequence[int], rule: str) -> dict:
    """Total probability copied from each representative."""
    out = {r: Fraction(0) for r in representatives}
    for k, qk in zip(slist.entries, slist.probs):
        out[representative_of(representatives, k, rule)] += qk
    return out


@dataclass(frozen=True)
class HistogramGuess:
    """Guessed bounds ``W_kappa`` for the representative scenarios."""

    representatives: tuple[int, ...]
    bounds: tuple[Fraction, ...]
    direction: str = UPPER
    weight: Fraction | None = None

    def __post_init__(self):
        if len(self.representatives) != len(self.bounds):
            raise ValueError("one bound per representative is required")
        if self.direction not in (UPPER, LOWER):
            raise ValueError(f"unknown direction {self.direction!r}")

    def bound(self, kappa: int):
        return self.bounds[self.representatives.index(kappa)]

    def as_dict(self) -> dict:
        return dict(zip(self.representatives, self.bounds))


def enumerate_bound_histograms(
    representatives: Sequence[int],
    value_grid: Sequence,
    monotone: str | None = NONINCREASING,
    direction: str = UPPER,
    weights: Sequence | None = None,
    bound=None,
) -> Iterator[HistogramGuess]:
    """Lazily yield grid assignments to the representatives.

    With ``monotone`` set, bounds must be nonincreasing (or nondecreasing)
    along the representatives. When ``weights`` and ``bound`` are given,
    partial assignments are abandoned once no completion can have a
    weighted sum strictly better than ``bound`` (below it for upper
    histograms, above it for lower ones).
    """
    reps = tuple(representatives)
    grid = sorted(set(value_grid))
    if not grid:
        return
    if not reps:
        yield HistogramGuess((), (), direction, Fraction(0))
        return
    w = tuple(Fraction(x) for x in weights) if weights is not None else None
    n = len(reps)
    # best possible contribution of the positions after i
    if w is not None:
        best_val = grid[0] if direction == UPPER else grid[-1]
        tail = [Fraction(0)] * (n + 1)
        for i in range(n - 1, -1, -1):
            tail[i] = tail[i + 1] + w[i] * best_val
    chosen: list = []

    def rec(i: int, acc):
        if i == n:
            yield HistogramGuess(reps, tuple(chosen), direction, acc if w is not None else None)
            return
        for v in grid:
            if chosen and monotone == NONINCREASING and v > chosen[-1]:
                continue
            if chosen and monotone == NONDECREASING and v < chosen[-1]:
                continue
            nxt = acc + w[i] * v if w is not None else acc
            if w is not None and bound is not None:
                opt = nxt + tail[i + 1]
                if direction == UPPER and opt >= bound:
                    continue
                if direction == LOWER and opt <= bound:
                    continue
            chosen.append(v)
            yield from rec(i + 1, nxt)
            chosen.pop()

    yield from rec(0, Fraction(0))


def assign_scenario_bound(histogram: HistogramGuess, kappa: int, rule: str | None = None):
    """Bound copied to scenario ``kappa`` (left rule for upper histograms,
    right rule for lower ones unless ``rule`` overrides it)."""
    if rule is None:
        rule = LEFT if histogram.direction == UPPER else RIGHT
    return histogram.bound(representative_of(histogram.representatives, kappa, rule))
