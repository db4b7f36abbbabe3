import csv
import json
from fractions import Fraction

import pytest

from stochsched.cli import BENCH_COLUMNS, main
from stochsched.serialize import load_instance, verify_report


def _instance(tmp_path, jobs, q, m=None, name="inst"):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps({"name": name, "jobs": jobs, "m": m or len(q), "q": q}))
    return path


@pytest.fixture
def tiny(tmp_path):
    return _instance(tmp_path, [3, 2, 2, 1], ["1/2", "1/2"], name="tiny")


def test_solve_makespan(tiny, tmp_path):
    out = tmp_path / "r.json"
    assert main(["solve", "--instance", str(tiny), "--objective", "makespan", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["cost"] == "6" and data["epsilon"] == "1/5" and data["objective"] == "makespan"
    assert verify_report(data)
    assert "elapsed_ms" in data and data["diagnostics"]["threads"] == 1


def test_solve_no_timing_is_byte_stable(tiny, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        args = ["solve", "--instance", str(tiny), "--objective", "lp", "--p", "2", "--no-timing", "--out", str(out)]
        assert main(args) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "elapsed_ms" not in json.loads(a.read_text())


@pytest.mark.parametrize(
    "extra",
    [
        ["--objective", "lp"],
        ["--objective", "makespan", "--epsilon", "1/4"],
        ["--objective", "makespan", "--epsilon", "0.2"],
        ["--objective", "median"],
        ["--objective", "makespan", "--budget-nodes", "0"],
    ],
)
def test_solve_usage_errors(tiny, extra, capsys):
    assert main(["solve", "--instance", str(tiny)] + extra) == 1
    assert capsys.readouterr().err


def test_malformed_instances(tmp_path):
    bad = [
        _instance(tmp_path, [1.5, 1], ["1/2", "1/2"], name="float"),
        _instance(tmp_path, [1, 1], ["1/2", "1/3"], name="sum"),
        _instance(tmp_path, [1, -1], ["1/2", "1/2"], name="neg"),
    ]
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json")
    for path in bad + [garbage, tmp_path / "missing.json"]:
        assert main(["solve", "--instance", str(path), "--objective", "makespan"]) == 1


def test_unknown_command():
    assert main(["frobnicate"]) == 1
    assert main([]) == 1


def test_exact(tiny, tmp_path, capsys):
    assert main(["exact", "--instance", str(tiny), "--objective", "makespan", "--no-timing"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["cost"] == "6" and data["method"] == "exact"
    pair = _instance(tmp_path, [1, 1], [0, 1], name="pair")
    assert main(["exact", "--instance", str(pair), "--objective", "makespan"]) == 0
    assert json.loads(capsys.readouterr().out)["cost"] == "1"


def test_exact_over_budget(tmp_path, capsys):
    big = _instance(tmp_path, list(range(1, 12)), [0, 1], name="big")
    assert main(["exact", "--instance", str(big), "--objective", "makespan"]) == 3
    assert "oracle cap" in capsys.readouterr().err


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["gen", "--n", "6", "--m", "3", "--seed", "11", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    inst = load_instance(a)
    assert inst.n == 6 and inst.m == 3 and sum(inst.q) == 1


def test_gen_point_distribution(tmp_path):
    out = tmp_path / "p.json"
    assert main(["gen", "--n", "4", "--m", "3", "--seed", "1", "--qdist", "point:2", "--out", str(out)]) == 0
    assert load_instance(out).q == (0, 1, 0)


@pytest.mark.parametrize(
    "args",
    [
        ["--n", "0", "--m", "2", "--seed", "1"],
        ["--n", "3", "--m", "1", "--seed", "1"],
        ["--n", "3", "--m", "2", "--seed", "1", "--qdist", "point:5"],
        ["--n", "3", "--m", "2", "--seed", "1", "--dist", "pareto"],
    ],
)
def test_gen_invalid(args):
    assert main(["gen"] + args) == 1


def test_bench(tmp_path):
    src = tmp_path / "suite"
    src.mkdir()
    _instance(src, [3, 2, 2, 1], ["1/2", "1/2"], name="a")
    _instance(src, [1] * 11, [0, 1], name="b")
    out = tmp_path / "bench.csv"
    assert main(["bench", "--dir", str(src), "--objectives", "makespan,santa", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == BENCH_COLUMNS
    assert [(r["instance"], r["objective"]) for r in rows] == [
        ("a.json", "makespan"), ("a.json", "santa"), ("b.json", "makespan"), ("b.json", "santa"),
    ]
    first = rows[0]
    assert first["scheme_cost"] == "6" and first["oracle_cost"] == "6" and float(first["ratio"]) == 1.0
    assert "oracle" in rows[2]["diagnostic"] and rows[2]["oracle_cost"] == ""


def test_bench_empty_and_missing_dir(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["bench", "--dir", str(empty)]) == 0
    assert capsys.readouterr().out.strip() == ",".join(BENCH_COLUMNS)
    assert main(["bench", "--dir", str(tmp_path / "nope")]) == 1


def test_solve_writes_rationals(tmp_path, capsys):
    path = _instance(tmp_path, ["5/2", "3/2", 1], ["1/3", "2/3"], name="rat")
    assert main(["solve", "--instance", str(path), "--objective", "santa", "--no-timing"]) == 0
    data = json.loads(capsys.readouterr().out)
    cost = data["cost"]
    assert isinstance(cost, str) and Fraction(cost) > 0
