import csv
import io
import subprocess
import sys

import pytest

from barycheb import cli


def run(capsys, *argv):
    code = cli.run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, list(csv.reader(io.StringIO(out))), err


def test_bn(capsys):
    code, rows, _ = run(capsys, "bn", "--n", "63")
    assert code == 0
    assert rows[0] == ["n_plus_1", "bn"]
    assert len(rows) == 2 and rows[1][0] == "64"
    assert 1.8e-16 / 5 <= float(rows[1][1]) <= 1.8e-16 * 5


def test_nodes_usual(capsys):
    code, rows, _ = run(capsys, "nodes", "--n", "2")
    assert code == 0
    assert rows == [["k", "x"], ["0", "-1.0"], ["1", "0.0"], ["2", "1.0"]]


def test_nodes_binned(capsys):
    code, rows, _ = run(capsys, "nodes", "--n", "4", "--bins", "3")
    assert rows[0] == ["k", "bin", "base", "u"]
    assert rows[2][:3] == ["1", "0", "-1.0"]


def test_weights(capsys):
    code, rows, _ = run(capsys, "weights", "--n", "2", "--formula", "second")
    assert [r[1] for r in rows[1:]] == ["0.5", "-1.0", "0.5"]


def test_eval(capsys):
    code, rows, _ = run(capsys, "eval", "--n", "40", "--f", "cos1", "--t", "0.5,-0.25")
    assert code == 0
    assert float(rows[1][1]) == pytest.approx(0.8775825618903728, abs=1e-12)


def test_eval_domain(capsys):
    code, _, err = run(capsys, "eval", "--n", "40", "--t", "1.5")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "eval", "--n", "40")
    assert code == 2


def test_errors_csv(capsys, tmp_path):
    out = tmp_path / "e.csv"
    code, rows, _ = run(capsys, "errors", "--formula", "first", "--bins", "3", "--n", "999",
                        "--f", "cos100", "--set", "Tm1", "--scale", "10", "--out", str(out))
    assert code == 0 and rows == []
    data = list(csv.reader(out.open()))
    assert data[0] == ["t", "stepII", "stepIII", "overall"]
    assert len(data) == 10_001
    # floats round-trip through repr
    assert all(float(v) == float(repr(float(v))) for v in data[1])


def test_errors_deterministic(capsys):
    args = ("errors", "--formula", "second", "--n", "999", "--f", "cos100", "--scale", "100")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--threads", "2")
    assert a == b


def test_step1_refusal(capsys):
    code, _, err = run(capsys, "errors", "--f", "cos1e4", "--n", "999")
    assert code == 3 and "allow-step1" in err


def test_ratio(capsys):
    code, rows, _ = run(capsys, "ratio", "--n", "999", "--scale", "100")
    assert code == 0
    assert rows[0][-1] == "ratio" and float(rows[1][-1]) > 10


def test_unknown_flag(capsys):
    code, _, err = run(capsys, "bn", "--bogus")
    assert code == 2
    assert "usage" in err


def test_missing_command(capsys):
    assert run(capsys)[0] == 2


def test_bad_layout(capsys):
    code, _, err = run(capsys, "nodes", "--bins", "5")
    assert code == 2


def test_zstats(capsys):
    code, rows, err = run(capsys, "zstats", "--n", "255")
    assert code == 0 and rows[0] == ["k", "z_k"] and len(rows) == 257
    assert "ratio=" in err


def test_epoly(capsys):
    code, rows, _ = run(capsys, "epoly", "--n", "99", "--f", "cos1")
    assert code == 0 and rows[0] == ["t", "E", "L", "Q"]


def test_bounds(capsys):
    code, rows, _ = run(capsys, "bounds", "--n", "64")
    assert code == 0
    assert all(r[3] == "true" for r in rows[1:])


def test_verify_layout(capsys):
    code, rows, _ = run(capsys, "verify-layout", "--bins", "dyadic:10", "--n", "500")
    assert code == 0 and rows[0] == ["check", "passed", "detail"]
    assert {r[0] for r in rows[1:]} >= {"base_difference_exact", "node_containment"}
    assert run(capsys, "verify-layout")[0] == 2


def test_bench(capsys):
    code, rows, _ = run(capsys, "bench", "--n", "400", "--scale", "100", "--repeats", "5")
    assert code == 0
    assert rows[0] == ["case", "median_ns_per_point", "normalized"]
    assert [r[0] for r in rows[1:]] == ["first/0", "first/three", "second/0"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "barycheb", "bn", "--n", "63"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].startswith("64,")
