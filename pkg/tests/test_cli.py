import csv
import io
import math

import numpy as np
import pytest

from amprox import cli, suite
from amprox.distances import kl
from amprox.problem_io import ProblemFileError, format_problem, parse_problem

SMART_1D = """# one column, two rows
family = smart
[matrix]
0.5
0.5
[data]
1 3
[start]
1
"""


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def smart_file(tmp_path):
    p = tmp_path / "smart.txt"
    p.write_text(SMART_1D)
    return p


def gen(tmp_path, name, *args):
    p = tmp_path / name
    code, _, _ = run(["gen", "--out", str(p), *args])
    assert code == 0
    return p


# problem files

def test_parse_and_roundtrip():
    pf = parse_problem(SMART_1D)
    assert pf.family == "smart" and pf.matrix.shape == (2, 1)
    again = parse_problem(format_problem(pf))
    np.testing.assert_array_equal(again.matrix, pf.matrix)
    np.testing.assert_array_equal(again.data, pf.data)


@pytest.mark.parametrize("text,line,field", [
    ("family = smart\n[matrix]\n1 x\n[data]\n1\n[start]\n1\n", 3, "matrix"),
    ("family = nope\n", 1, "family"),
    ("family = smart\nmax_iters = ten\n", 2, "max_iters"),
    ("family = smart\n[matrix]\n1 2\n1\n[data]\n1 1\n[start]\n1 1\n", 4, "matrix"),
    ("family = smart\n[matrix]\n1\n[data]\n1 2\n[start]\n1\n", 5, "data"),
    ("family = smart\n[matrix]\n1\n[data]\n1\n", None, "start"),
    ("family = smart\n[matrix]\n1\n[data]\n-1\n[start]\n1\n", None, None),
])
def test_malformed_files_name_location(text, line, field):
    with pytest.raises(ProblemFileError) as exc:
        parse_problem(text)
    assert exc.value.line == line and exc.value.field == field


# solve

def test_solve_one_column_smart(smart_file, tmp_path):
    trace = tmp_path / "t.csv"
    code, out, _ = run(["solve", "--file", str(smart_file), "--out", str(trace)])
    assert code == 0
    final_f = float(next(l for l in out.splitlines() if l.startswith("final_f")).split()[1])
    half = math.sqrt(3)  # P x at the minimizer x = 2 sqrt(3)
    oracle = kl(half, 1.0) + kl(half, 3.0)
    assert final_f == pytest.approx(oracle, abs=1e-10)
    assert trace.read_text().splitlines()[0] == "k,f,step_distance,first_monotonicity,mass"


def test_solve_iteration_cap_exit_2(tmp_path):
    p = gen(tmp_path, "p.txt", "--family", "emml", "-I", "6", "-J", "4", "--seed", "1")
    code, _, _ = run(["solve", "--file", str(p), "--max-iters", "3", "--out", str(tmp_path / "t.csv")])
    assert code == 2


def test_solve_landweber_gamma_too_large(tmp_path):
    p = gen(tmp_path, "e.txt", "--family", "landweber", "-I", "3", "-J", "4", "--seed", "2")
    code, _, err = run(["solve", "--file", str(p), "--gamma", "1e6", "--out", "-"])
    assert code == 1 and "2/rho(A^T A)" in err


def test_solve_malformed_file(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("family = smart\n[matrix]\n0.5 oops\n")
    code, _, err = run(["solve", "--file", str(p)])
    assert code == 1 and "line 3" in err and "matrix" in err


def test_gen_consistent_then_solve(tmp_path):
    p = gen(tmp_path, "c.txt", "--family", "smart", "-I", "5", "-J", "3", "--seed", "4", "--consistent")
    code, out, _ = run(["solve", "--file", str(p), "--f-tol", "1e-15", "--step-tol", "0",
                        "--max-iters", "200000", "--out", str(tmp_path / "t.csv")])
    assert code == 0
    assert float(next(l for l in out.splitlines() if l.startswith("final_f")).split()[1]) < 1e-8


def test_gen_deterministic(tmp_path):
    a = gen(tmp_path, "a.txt", "--seed", "9", "-I", "3", "-J", "2")
    b = gen(tmp_path, "b.txt", "--seed", "9", "-I", "3", "-J", "2")
    assert a.read_bytes() == b.read_bytes()
    assert "seed = 9" in a.read_text()
    one = parse_problem(gen(tmp_path, "one.txt", "-I", "1", "-J", "1", "--family", "emml").read_text())
    assert one.matrix.tolist() == [[1.0]]


def test_solve_trace_deterministic(smart_file, tmp_path):
    run(["solve", "--file", str(smart_file), "--out", str(tmp_path / "a.csv")])
    run(["solve", "--file", str(smart_file), "--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


# check

def test_check_all_on_smart(tmp_path):
    p = gen(tmp_path, "s.txt", "--family", "smart", "-I", "5", "-J", "3", "--seed", "11")
    rep = tmp_path / "r.csv"
    code, out, _ = run(["check", "--file", str(p), "--all", "--samples", "40", "--out", str(rep)])
    assert code == 0, out
    lines = rep.read_text().splitlines()
    assert lines[0] == "name,samples,worst_slack,mean_slack,tolerance,asserted,pass,notes"
    assert len(lines) == 1 + len(suite.applicable("smart"))


def test_check_probe_never_fails(tmp_path):
    p = gen(tmp_path, "s.txt", "--family", "pearson", "-I", "4", "-J", "3", "--seed", "3")
    rep = tmp_path / "r.csv"
    code, _, _ = run(["check", "--file", str(p), "--props", "hrr_probe", "--out", str(rep)])
    assert code == 0 and rep.exists()
    row = next(csv.DictReader(rep.read_text().splitlines()))
    assert row["name"] == "hrr_probe" and row["asserted"] == "0"


def test_check_first_monotonicity_euclid(tmp_path):
    p = gen(tmp_path, "e.txt", "--family", "euclid", "-I", "3", "-J", "5", "--seed", "5")
    code, _, _ = run(["check", "--file", str(p), "--props", "first_monotonicity", "--out", str(tmp_path / "r")])
    assert code == 0


def test_check_unknown_property(smart_file):
    code, _, err = run(["check", "--file", str(smart_file), "--props", "bogus", "--out", "-"])
    assert code == 1 and "bogus" in err


def test_check_fails_when_asserted_property_fails(monkeypatch, smart_file, tmp_path):
    from amprox.report import CheckReport

    monkeypatch.setitem(suite.RUNNERS, "mass", lambda ctx: CheckReport.from_slacks("mass", [-1.0], 1e-12))
    code, _, _ = run(["check", "--file", str(smart_file), "--props", "mass", "--out", str(tmp_path / "r")])
    assert code == 1


# compare

def test_compare_equivalence(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("family = euclid\n[matrix]\n1 1\n[data]\n2\n[start]\n0 0\n")
    out_csv = tmp_path / "c.csv"
    code, out, _ = run(["compare", "--file", str(p), "--out", str(out_csv)])
    assert code == 0
    assert float(out.split("max_deviation:")[1].split()[0]) <= 1e-10
    assert len(out_csv.read_text().splitlines()) == 51
    code, out, _ = run(["compare", "--file", str(p), "--max-iters", "1", "--out", str(out_csv)])
    assert float(out.split("max_deviation:")[1].split()[0]) <= 1e-15


def test_compare_hellinger_columns_nonnegative(tmp_path):
    p = tmp_path / "h.txt"
    p.write_text("family = hellinger\n[matrix]\n0.5\n0.5\n[data]\n1 3\n[start]\n1\n")
    out_csv = tmp_path / "c.csv"
    code, _, _ = run(["compare", "--file", str(p), "--out", str(out_csv)])
    assert code == 0
    rows = [l.split(",") for l in out_csv.read_text().splitlines()[1:]]
    assert rows and all(float(r[1]) >= -1e-12 and float(r[2]) >= -1e-12 for r in rows)


def test_compare_wrong_family(smart_file):
    code, _, err = run(["compare", "--file", str(smart_file), "--out", "-"])
    assert code == 1 and "compare" in err
