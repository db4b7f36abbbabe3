"""JSON forms of instances, solutions and run reports.

Rationals are written as JSON integers or ``"num/den"`` strings and floats
are rejected on input, so a round trip is exact.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from ._numeric import as_fraction, format_fraction
from .model import (
    LPNORM,
    BagAssignment,
    Instance,
    Objective,
    ScenarioAssignment,
    TwoStageSolution,
    ValidationError,
    expected_cost,
    scenario_keys,
)


def _rational_out(x: Fraction):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else format_fraction(x)


def _rational_in(x, what: str) -> Fraction:
    if isinstance(x, float):
        raise ValidationError(f"{what}: floats are not accepted, use an integer or \"num/den\"")
    try:
        return as_fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"{what}: {exc}") from None


def instance_to_dict(instance: Instance) -> dict:
    return {
        "name": instance.name,
        "jobs": [_rational_out(p) for p in instance.jobs],
        "m": instance.m,
        "q": [_rational_out(x) for x in instance.q],
    }


def instance_from_dict(data: Any) -> Instance:
    """Parse and validate an instance object."""
    if not isinstance(data, dict):
        raise ValidationError("an instance must be a JSON object")
    missing = [k for k in ("jobs", "m", "q") if k not in data]
    if missing:
        raise ValidationError(f"instance lacks {', '.join(missing)}")
    if not isinstance(data["jobs"], list) or not isinstance(data["q"], list):
        raise ValidationError("jobs and q must be arrays")
    m = data["m"]
    if not isinstance(m, int) or isinstance(m, bool):
        raise ValidationError("m must be an integer")
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ValidationError("name must be a string")
    jobs = tuple(_rational_in(p, f"jobs[{i}]") for i, p in enumerate(data["jobs"]))
    q = tuple(_rational_in(x, f"q[{i}]") for i, x in enumerate(data["q"]))
    return Instance(jobs, m, q, name)


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"


def load_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(data)


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(dumps(instance_to_dict(instance)))


def objective_to_dict(objective: Objective) -> dict:
    if objective.kind == LPNORM:
        return {"objective": "lp", "p": _rational_out(objective.p)}
    return {"objective": objective.kind}


def objective_from_name(name: str, p=None) -> Objective:
    if name == "makespan":
        return Objective.makespan()
    if name == "santa":
        return Objective.santa()
    if name in ("lp", "lpnorm"):
        if p is None:
            raise ValidationError("the lp objective needs p")
        return Objective.lpnorm(_rational_in(p, "p"))
    raise ValidationError(f"unknown objective {name!r}")


def solution_to_dict(solution: TwoStageSolution) -> dict:
    return {
        "bag_of": list(solution.bags.bag_of),
        "per_scenario": {str(k): list(a.machine_of) for k, a in sorted(solution.per_scenario.items())},
    }


def solution_from_dict(data: dict, m: int) -> TwoStageSolution:
    bags = BagAssignment(tuple(int(b) for b in data["bag_of"]), m)
    per = {
        int(k): ScenarioAssignment(int(k), tuple(int(i) for i in v))
        for k, v in data["per_scenario"].items()
    }
    return TwoStageSolution(bags, per)


def cost_out(cost) -> str:
    """Exact costs as ``"num/den"`` strings; norm costs (floats) as their shortest repr."""
    if isinstance(cost, float):
        return repr(cost)
    return format_fraction(Fraction(cost))


def report_dict(
    instance: Instance,
    objective: Objective,
    epsilon,
    method: str,
    solution: TwoStageSolution,
    cost,
    diagnostics: dict,
    elapsed_ms: float | None,
    **extra,
) -> dict:
    """Report object; ``elapsed_ms=None`` leaves the timing out."""
    out = {"instance": instance_to_dict(instance)}
    out.update(objective_to_dict(objective))
    out["epsilon"] = _rational_out(epsilon) if epsilon is not None else None
    out["method"] = method
    out["cost"] = cost_out(cost)
    out["cost_keys"] = {str(k): cost_out(v) for k, v in scenario_keys(instance, solution, objective).items()}
    out.update(extra)
    out["solution"] = solution_to_dict(solution)
    out["diagnostics"] = diagnostics
    if elapsed_ms is not None:
        out["elapsed_ms"] = round(elapsed_ms, 3)
    return out


def verify_report(data: dict) -> bool:
    """Re-evaluate the embedded solution on the embedded instance."""
    instance = instance_from_dict(data["instance"])
    objective = objective_from_name(data["objective"], data.get("p"))
    solution = solution_from_dict(data["solution"], instance.m)
    return cost_out(expected_cost(instance, solution, objective)) == data["cost"]
