import csv
import json

import pytest

from fracpg.cli import main
from fracpg.problem import dumps_problem, zero_problem


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_solve_example3(tmp_path, capsys):
    code, out = run(capsys, "solve", "--builtin", "example3", "--N", "9", "--out", str(tmp_path))
    assert code == 0
    result = json.loads((tmp_path / "result.json").read_text())
    assert all(v < 1e-13 for k, v in result["errors"].items() if k.startswith("e_"))
    assert abs(result["coefficients"]["monomial"][5] - 1) < 1e-12
    assert len(result["coefficients"]["fgjf"]) == 6
    with open(tmp_path / "samples.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "y_N", "exact"] and len(rows) == 201
    assert json.loads(out)["N"] == 9


def test_solve_rejects_small_N(tmp_path, capsys):
    code, out = run(capsys, "solve", "--builtin", "example3", "--N", "3", "--out", str(tmp_path))
    assert code == 2
    err = json.loads(out)
    assert err["exit_code"] == 2 and "alpha*b" in err["message"]
    assert json.loads((tmp_path / "error.json").read_text()) == err


def test_solve_zero_problem_file(tmp_path, capsys):
    path = tmp_path / "zero.json"
    path.write_text(dumps_problem(zero_problem()))
    code, _ = run(capsys, "solve", "--problem", str(path), "--N", "8", "--out", str(tmp_path))
    assert code == 0
    result = json.loads((tmp_path / "result.json").read_text())
    assert not any(result["coefficients"]["monomial"])


def test_invalid_problem_file_lists_issues(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"alpha": [1, 2], "beta": [3, 2], "T": -1}))
    code, out = run(capsys, "solve", "--problem", str(path), "--N", "8")
    assert code == 2
    assert {i["path"] for i in json.loads(out)["issues"]} == {"beta", "T"}


def test_usage_errors(capsys):
    assert run(capsys, "solve", "--builtin", "example7", "--N", "8")[0] == 2
    assert run(capsys, "solve", "--builtin", "example3", "--N", "9,12")[0] == 2
    assert run(capsys, "converge", "--builtin", "example3", "--N", "9,6")[0] == 2
    assert run(capsys, "solve", "--builtin", "example3", "--N", "x")[0] == 2


def test_emit_matrices(tmp_path, capsys):
    code, _ = run(capsys, "solve", "--builtin", "example3", "--N", "9", "--out", str(tmp_path), "--emit-matrices")
    assert code == 0
    assert (tmp_path / "matrices" / "H_2.csv").exists()


def test_converge_example1(tmp_path, capsys):
    code, out = run(capsys, "converge", "--builtin", "example1", "--N", "8,16,32,64", "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "convergence.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["N", "e_L2", "e_Linf", "e_wL2", "cpu_seconds"]
    e = [float(r[1]) for r in rows[1:]]
    assert all(b < a for a, b in zip(e, e[1:]))
    meta = json.loads((tmp_path / "convergence.json").read_text())
    assert meta["gating"] and meta["fit"]["slope"] < 0
    assert (tmp_path / "semilog.csv").read_text().startswith("N,log10_e_L2")
    assert out.startswith("N,e_L2")


def test_converge_single_N_has_no_fit(tmp_path, capsys):
    code, out = run(capsys, "converge", "--builtin", "example3", "--N", "9", "--out", str(tmp_path))
    assert code == 0 and "no fit" in out
    meta = json.loads((tmp_path / "convergence.json").read_text())
    assert meta["fit"]["slope"] is None


def test_outputs_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(capsys, "converge", "--builtin", "example1", "--N", "8,16", "--out", str(d))[0] == 0
    strip = lambda p: [r[:4] for r in csv.reader(open(p))]  # noqa: E731 - cpu time differs run to run
    assert strip(a / "convergence.csv") == strip(b / "convergence.csv")


@pytest.mark.parametrize("args", [("--builtin", "example3", "--N", "12"), ("--builtin", "example1", "--N", "24"),
                                  ("--seed", "5", "--N", "16")])
def test_oracle_check_passes(capsys, args):
    code, out = run(capsys, "oracle-check", *args)
    assert code == 0
    assert json.loads(out)["max_abs_diff"] <= 1e-11


def test_oracle_check_failure_code(monkeypatch, capsys):
    import fracpg.cli as cli

    monkeypatch.setattr(cli, "ORACLE_TOL", -1.0)
    code, out = run(capsys, "oracle-check", "--builtin", "example3", "--N", "12")
    assert code == 4 and "OracleMismatch" in out


def test_validate_quick_and_seed(tmp_path, capsys):
    code, out = run(capsys, "validate", "--quick", "--seed", "7", "--out", str(tmp_path / "a"))
    assert code == 0 and "FAIL" not in out
    run(capsys, "validate", "--quick", "--seed", "7", "--out", str(tmp_path / "b"))
    details = [json.loads((tmp_path / d / "validate.json").read_text())["results"] for d in "ab"]
    assert [r["detail"] for r in details[0]] == [r["detail"] for r in details[1]]


def test_validate_failure_code(monkeypatch, capsys):
    import fracpg.cli as cli
    from fracpg.validate import CheckResult

    monkeypatch.setattr(cli, "run_suite", lambda seed, quick: [CheckResult("x", False, "forced", 0.0)])
    assert run(capsys, "validate")[0] == 5


def test_numeric_failure_code(monkeypatch, capsys):
    import fracpg.cli as cli
    from fracpg.errors import NumericError

    def boom(*a, **k):
        raise NumericError("non-finite coefficient")

    monkeypatch.setattr(cli, "solve_recurrence", boom)
    code, out = run(capsys, "solve", "--builtin", "example3", "--N", "9")
    assert code == 3 and json.loads(out)["error"] == "NumericError"


def test_examples_listing(capsys):
    code, out = run(capsys, "examples")
    assert code == 0 and out.count("\n") == 3 and "non-gating" in out
