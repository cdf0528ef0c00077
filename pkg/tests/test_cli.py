from __future__ import annotations

import json
import subprocess
import sys

import pytest

from pcpforge.cli import main

FIXTURE = "tests/fixtures/e2lin_cycle_4.json"


@pytest.fixture(autouse=True)
def repo_root(monkeypatch, fixtures):
    monkeypatch.chdir(fixtures.parent.parent)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_reproduces_the_fixture(capsys, fixtures):
    code, out, _ = run(capsys, "gen", "e2lin-cycle", "--n", "4")
    assert code == 0 and out == (fixtures / "e2lin_cycle_4.json").read_text()


def test_opt_and_eval_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "opt", FIXTURE)
    data = json.loads(out)
    assert code == 0 and data["opt"] == "1"
    (tmp_path / "w.json").write_text(json.dumps(data["witness"]))
    (tmp_path / "half.json").write_text(json.dumps({"1": 0, "2": 1, "3": 0, "4": 0}))
    assert json.loads(run(capsys, "eval", FIXTURE, str(tmp_path / "w.json"))[1])["value"] == "1"
    assert json.loads(run(capsys, "eval", FIXTURE, str(tmp_path / "half.json"))[1])["cost"] == "1/2"


def test_csv_output(capsys):
    code, out, _ = run(capsys, "opt", FIXTURE, "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "key,value"


def test_global_options_work_on_either_side_of_the_subcommand(capsys):
    before = run(capsys, "--format", "csv", "--seed", "5", "sens", FIXTURE, "--algorithm", "random", "--samples", "4")
    after = run(capsys, "sens", FIXTURE, "--algorithm", "random", "--samples", "4", "--format", "csv", "--seed", "5")
    assert before == after and before[1].splitlines()[0] == "key,value"


def test_transform_writes_to_out(capsys, tmp_path):
    code, _, _ = run(capsys, "transform", "degree-reduce", FIXTURE, "--d0", "4", "--out", str(tmp_path))
    assert code == 0 and any(tmp_path.iterdir())


def test_sensitivity_of_the_constant_algorithm(capsys):
    code, out, _ = run(capsys, "sens", FIXTURE, "--algorithm", "constant", "--samples", "2")
    assert code == 0 and json.loads(out)["sensitivity"] == "0"


def test_verify_and_report(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "degree-reduce", "--trials", "5", "--out", str(tmp_path))
    assert code == 0
    path = next(tmp_path.iterdir())
    code, out, _ = run(capsys, "report", str(path))
    assert code == 0 and json.loads(out)[0]["ok"]
    data = json.loads(path.read_text())
    data["passed"] = False
    path.write_text(json.dumps(data))
    assert run(capsys, "report", str(path))[0] == 1


def test_fglss_and_nonsig(capsys):
    code, out, _ = run(capsys, "fglss", FIXTURE)
    assert code == 0 and json.loads(out)["max_clique"] == 4
    code, out, _ = run(capsys, "nonsig", "--n", "8", "--d", "3", "--t", "1", "--samples", "2")
    assert code == 0 and json.loads(out)["pass"]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["verify", "no-such-pass"],
        ["gen", "nothing"],
        ["opt", "missing.json"],
        ["gen", "e2lin-cycle", "--n", "5"],
        ["opt", FIXTURE, "--format", "xml"],
    ],
)
def test_usage_and_input_errors_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_console_script_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "pcpforge.cli", "verify", "e3sat", "--trials", "2"], capture_output=True, text=True
    )
    assert res.returncode == 0 and json.loads(res.stdout)["passed"]
