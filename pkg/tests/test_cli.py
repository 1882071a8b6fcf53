import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from bvcat import cli

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

CASES = {
    "action": ("check-qme", 0),
    "check_relation": ("check-relation", 0),
    "compose_genlag": ("compose", 0),
    "compose_relations": ("compose", 0),
    "degenerate_transfer": ("transfer", 2),
    "diagonal": ("classify", 0),
    "even_gaussian": ("integrate", 0),
    "even_moment": ("integrate", 0),
    "odd_gaussian": ("integrate", 0),
    "relation": ("classify", 0),
    "transfer": ("transfer", 0),
}


def call(*argv):
    out = io.StringIO()
    old = sys.stdout
    sys.stdout = out
    try:
        code = cli.main(list(argv))
    finally:
        sys.stdout = old
    return code, out.getvalue()


def solve(name, *extra):
    command, _ = CASES[name]
    code, text = call(command, str(PROBLEMS / f"{name}.json"), "--max-weight", "4", *extra)
    return code, json.loads(text)


def test_every_problem_file_is_covered():
    assert {p.stem for p in PROBLEMS.glob("*.json")} == set(CASES)


@pytest.mark.parametrize("name", sorted(CASES))
def test_exit_codes(name):
    code, report = solve(name)
    assert code == CASES[name][1] == report["exit_code"]


def test_degenerate_transfer_reports_the_error_chain():
    _, report = solve("degenerate_transfer")
    assert report["result"]["error"] == "Degenerate"
    assert report["result"]["is_a"] == ["NonComposable", "DomainError"]


def test_even_gaussian():
    _, report = solve("even_gaussian")
    assert report["result"]["prefactor"] == {"q": "1/5", "sqrt": "5", "two_pi_half": 2, "hbar_half": 2}
    assert report["result"]["series"]["terms"] == [{"coeff": "1", "g": 0, "indices": []}]


def test_even_second_moment():
    _, report = solve("even_moment")
    assert report["result"]["series"]["terms"] == [{"coeff": "3/5", "g": 1, "indices": []}]


def test_odd_gaussian():
    _, report = solve("odd_gaussian")
    assert report["result"]["prefactor"] == {"q": "3/2", "sqrt": "1", "two_pi_half": 0, "hbar_half": -2}


def test_classification():
    for name in ("relation", "diagonal"):
        _, report = solve(name)
        assert report["result"]["class"] == "lagrangian"


@pytest.mark.parametrize("name", sorted(CASES))
def test_output_is_deterministic(name):
    command, _ = CASES[name]
    argv = (command, str(PROBLEMS / f"{name}.json"), "--max-weight", "4")
    assert call(*argv)[1] == call(*argv)[1]


def test_timing_is_opt_in():
    _, plain = solve("even_gaussian")
    _, timed = solve("even_gaussian", "--timing")
    assert "seconds" not in plain and isinstance(timed["seconds"], float)


def test_stdin(monkeypatch):
    text = (PROBLEMS / "even_gaussian.json").read_text()
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    code, out = call("integrate", "-", "--max-weight", "4")
    assert code == 0
    assert json.loads(out)["result"] == solve("even_gaussian")[1]["result"]


def test_out_file(tmp_path):
    target = tmp_path / "r.json"
    code, out = call("integrate", str(PROBLEMS / "even_gaussian.json"), "--max-weight", "4", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["exit_code"] == 0


def test_transferred_action_round_trips(tmp_path):
    _, report = solve("transfer")
    problem = {"action": report["result"]["action"]}
    path = tmp_path / "a.json"
    path.write_text(json.dumps(problem))
    code, out = call("check-qme", str(path), "--max-weight", "4")
    assert code == 0 and json.loads(out)["result"]["holds"]


def write(tmp_path, text):
    path = tmp_path / "p.json"
    path.write_text(text)
    return str(path)


def test_floats_are_rejected(tmp_path):
    text = (PROBLEMS / "even_gaussian.json").read_text().replace('"1"', "1.0", 1)
    code, out = call("integrate", write(tmp_path, text), "--max-weight", "4")
    assert code == 3 and json.loads(out)["result"]["error"] == "MalformedInput"


@pytest.mark.parametrize("text", ["[]", "{", '{"f": 3}', '{"version": 99}'])
def test_malformed_input(tmp_path, text):
    code, out = call("integrate", write(tmp_path, text), "--max-weight", "4")
    assert code == 3 and json.loads(out)["exit_code"] == 3


def test_max_weight_is_required_for_series():
    code, _ = call("integrate", str(PROBLEMS / "even_gaussian.json"))
    assert code == 3


def test_usage_errors_exit_three():
    assert call("nonsense")[0] == 3
    assert call("verify", "--suite", "nope")[0] == 3


def test_missing_file():
    assert call("classify", "/nonexistent/x.json")[0] == 3


@pytest.mark.parametrize("suite", ["symplectic", "densities", "bvalgebra"])
def test_verify_suites(suite):
    code, out = call("verify", "--suite", suite, "--instances", "3", "--seed", "5")
    report = json.loads(out)
    assert code == 0 and report["result"]["ok"]
    assert out == call("verify", "--suite", suite, "--instances", "3", "--seed", "5")[1]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "bvcat", "classify", str(PROBLEMS / "diagonal.json")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["result"]["class"] == "lagrangian"
