"""Seeded random instances.

All randomness comes from a :class:`random.Random` seeded by the caller, so
the same arguments always give the same instance.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .model import Instance, ValidationError

SIZE_DISTS = ("uniform", "geometric", "twotier")
Q_DISTS = ("uniform", "geometric", "random")


def _size(rng: random.Random, dist: str) -> Fraction:
    if dist == "uniform":
        return Fraction(rng.randint(1, 1000), 100)
    if dist == "geometric":
        # a mantissa in [1/2, 1] times 2**e with e in 0..6
        return Fraction(rng.randint(500, 1000), 1000) * 2 ** rng.randint(0, 6)
    if dist == "twotier":
        if rng.random() < 0.25:
            return Fraction(rng.randint(500, 1000), 10)
        return Fraction(rng.randint(10, 100), 10)
    raise ValidationError(f"unknown size distribution {dist!r}")


def _weights(rng: random.Random, m: int, qdist: str) -> list[int]:
    if qdist == "uniform":
        return [1] * m
    if qdist == "geometric":
        return [2 ** (m - k) for k in range(1, m + 1)]
    if qdist == "random":
        w = [rng.randint(0, 3) for _ in range(m)]
        if not any(w):
            w[rng.randrange(m)] = 1
        return w
    if qdist.startswith("point:"):
        try:
            k = int(qdist.split(":", 1)[1])
        except ValueError:
            raise ValidationError(f"bad point distribution {qdist!r}") from None
        if not 1 <= k <= m:
            raise ValidationError(f"point mass at {k} outside 1..{m}")
        return [int(i == k) for i in range(1, m + 1)]
    raise ValidationError(f"unknown scenario distribution {qdist!r}")


def scenario_distribution(weights: list[int]) -> tuple[Fraction, ...]:
    """Normalize nonnegative integer weights; the last entry takes the remainder."""
    total = sum(weights)
    if total <= 0:
        raise ValidationError("weights must have a positive sum")
    head = [Fraction(w, total) for w in weights[:-1]]
    return tuple(head) + (1 - sum(head, Fraction(0)),)


def generate_instance(
    n: int,
    m: int,
    seed: int,
    dist: str = "uniform",
    qdist: str = "uniform",
    name: str | None = None,
) -> Instance:
    """Random instance with ``n`` jobs and ``m`` bags.

    Sizes have denominators at most 1000. ``qdist`` is ``uniform``,
    ``geometric`` (``q_k`` proportional to ``2**-k``), ``random`` (integer
    weights 0..3) or ``point:K``.
    """
    if n < 1:
        raise ValidationError("n must be at least 1")
    if m < 2:
        raise ValidationError("m must be at least 2")
    rng = random.Random(seed)
    jobs = tuple(_size(rng, dist) for _ in range(n))
    q = scenario_distribution(_weights(rng, m, qdist))
    return Instance(jobs, m, q, name if name is not None else f"{dist}-n{n}-m{m}-s{seed}")


def suite_instance(seed: int, n_range=(4, 8), m_range=(2, 4), dist: str = "uniform") -> Instance:
    """Desk-scale instance of the oracle suites: ``n`` and ``m`` drawn from the seed."""
    rng = random.Random(seed)
    n = rng.randint(*n_range)
    m = rng.randint(*m_range)
    return generate_instance(n, m, seed, dist, "random", name=f"suite-{seed}")
