"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numeric import as_fraction
from .model import ValidationError


def check_jobs(X, *, allow_float: bool = False) -> tuple[Fraction, ...]:
    """Job sizes as positive Fractions.

    ``X`` is a one-dimensional sequence or array (a single-column 2-D array
    is flattened). Floats need ``allow_float=True`` and are taken at their
    exact binary value.
    """
    if isinstance(X, np.ndarray):
        if X.ndim == 2 and X.shape[1] == 1:
            X = X[:, 0]
        if X.ndim != 1:
            raise ValidationError(f"expected a 1-D array of job sizes, got shape {X.shape}")
        values = X.tolist()
    else:
        values = list(X)
    if not values:
        raise ValidationError("at least one job is required")
    try:
        jobs = tuple(as_fraction(v, allow_float=allow_float) for v in values)
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    if any(p <= 0 for p in jobs):
        raise ValidationError("job sizes must be positive")
    return jobs


def check_distribution(q: Sequence, m: int | None = None, *, allow_float: bool = False) -> tuple[Fraction, ...]:
    """Scenario probabilities summing to exactly one."""
    try:
        probs = tuple(as_fraction(v, allow_float=allow_float) for v in q)
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    if m is not None and len(probs) != m:
        raise ValidationError(f"q has {len(probs)} entries, expected {m}")
    if any(x < 0 for x in probs):
        raise ValidationError("probabilities must be nonnegative")
    if sum(probs) != 1:
        raise ValidationError(f"probabilities sum to {sum(probs)}, not exactly 1")
    return probs


def check_scenarios(ks, m: int | None = None) -> list[int]:
    """Machine counts to predict for (a scalar or a sequence of positive ints)."""
    if isinstance(ks, (int, np.integer)):
        ks = [ks]
    out = []
    for k in ks:
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
            raise ValidationError(f"scenario {k!r} is not an integer")
        k = int(k)
        if k < 1:
            raise ValidationError("scenarios need at least one machine")
        if m is not None and k > m:
            raise ValidationError(f"scenario {k} exceeds the {m} bags")
        out.append(k)
    return out
