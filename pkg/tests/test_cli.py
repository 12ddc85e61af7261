import json

import numpy as np
import pytest

from depbound.cli import main
from depbound.core import AdjacencyMatrix
from depbound.estimators import v1
from depbound.inference import ci_from_se
from depbound.io import load_data


@pytest.fixture
def files(tmp_path):
    def make(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make


@pytest.fixture
def four_file(files):
    return files("o.csv", "id,x,d\n1,0,1\n2,0,1\n3,1,1\n4,1,1\n")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def parse_table(out):
    lines = out.strip().splitlines()
    head = lines.index(next(l for l in lines if l.startswith("estimator")))
    cols = lines[head].split()
    rows = {}
    for line in lines[head + 1:]:
        if line.startswith("note"):
            break
        vals = line.split()
        rows[vals[0]] = dict(zip(cols, vals))
    meta = dict(l.split(": ", 1) for l in lines[:head])
    return meta, rows


def test_estimate_fixture(capsys, four_file):
    code, out, _ = run(capsys, "estimate", four_file, "--assume-homoskedastic")
    assert code == 0
    meta, rows = parse_table(out)
    assert rows["naive"]["se"] == "0.25"
    for name in ("v1", "v2", "v2_prime"):
        assert rows[name]["se"] == "0.353553"
        assert rows[name]["status"] == "optimal"


def test_estimate_defaults_exclude_homoskedastic(capsys, four_file):
    code, out, _ = run(capsys, "estimate", four_file)
    assert code == 0
    assert set(parse_table(out)[1]) == {"naive", "v1"}
    code, _, err = run(capsys, "estimate", four_file, "--estimators", "v2")
    assert code == 2 and "assume-homoskedastic" in err


def test_printed_intervals_recompute(capsys, four_file):
    _, out, _ = run(capsys, "estimate", four_file, "--assume-homoskedastic", "--alpha", "0.1")
    meta, rows = parse_table(out)
    for r in rows.values():
        ci = ci_from_se(float(meta["mean"]), float(r["se"]), float(meta["alpha"]))
        assert f"{ci.lower:.6g}" == r["ci_lower"]
        assert f"{ci.upper:.6g}" == r["ci_upper"]


def test_missing_edges_equals_empty(capsys, files, four_file):
    empty = files("e.csv", "id_i,id_j\n")
    a = json.loads(run(capsys, "estimate", four_file, "--json")[1])
    b = json.loads(run(capsys, "estimate", four_file, empty, "--json")[1])
    for name in ("naive", "v1"):
        assert a["estimates"][name]["variance"] == b["estimates"][name]["variance"]


def test_table_one_naive(capsys, files):
    ones = 335  # 335 / 1022 rounds to 0.328
    rows = "".join(f"{k},{1 if k < ones else 0},3\n" for k in range(1022))
    path = files("binary.csv", "id,x,d\n" + rows)
    code, out, _ = run(capsys, "estimate", path, "--estimators", "naive", "--json")
    rep = json.loads(out)
    est = rep["estimates"]["naive"]
    assert round(rep["mean"], 3) == 0.328
    assert round(est["se"], 4) == 0.0147
    assert (round(est["ci_lower"], 3), round(est["ci_upper"], 3)) == (0.299, 0.357)


def solve_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_solve_examples(capsys, files, four_file):
    code, res = solve_json(capsys, "solve", four_file)
    assert code == 0 and res["objective"] == 0.5
    assert sorted(map(tuple, res["edges"])) == [("1", "2"), ("3", "4")]
    forced = files("f.csv", "id_i,id_j\n1,3\n")
    code, res = solve_json(capsys, "solve", four_file, forced)
    assert res["objective"] == -0.25 and res["edges"] == [["1", "3"]]
    tri = files("t.csv", "id,x,d\na,1,2\nb,2,2\nc,4,2\n")
    code, res = solve_json(capsys, "solve", tri, "--objective", "v2")
    assert res["objective"] == 3 and len(res["edges"]) == 3


def test_brute_force_agrees(capsys, files, four_file):
    forced = files("f.csv", "id_i,id_j\n1,3\n")
    tri = files("t.csv", "id,x,d\na,1,2\nb,2,2\nc,4,2\n")
    for args in ([four_file], [four_file, forced], [tri, "--objective", "v2"]):
        _, a = solve_json(capsys, "solve", *args)
        _, b = solve_json(capsys, "brute-force", *args)
        assert a["objective"] == b["objective"]
        assert b["status"] == "optimal"


def test_brute_force_refuses_large(capsys, files):
    path = files("big.csv", "id,x,d\n" + "".join(f"{k},{k % 3},2\n" for k in range(9)))
    code, _, err = run(capsys, "brute-force", path)
    assert code == 2 and "n <= 8" in err


def test_estimate_agrees_with_solve(capsys, files, tmp_path):
    rng = np.random.default_rng(1)
    rows = "".join(f"u{k},{rng.normal():.6f},{rng.integers(0, 4)}\n" for k in range(40))
    path = files("o.csv", "id,x,d\n" + rows)
    edges_out = tmp_path / "m.csv"
    run(capsys, "solve", path, "--edges-out", edges_out)
    data = load_data(path)
    sol = load_data(path, edges_out)
    A = AdjacencyMatrix(data.n, frozenset(sol.observed_edges))
    _, out, _ = run(capsys, "estimate", path)
    assert parse_table(out)[1]["v1"]["variance"] == f"{v1(A, data).value:.6g}"


def test_edges_file_written_under_original_ids(capsys, four_file, tmp_path):
    target = tmp_path / "best.csv"
    run(capsys, "solve", four_file, "--edges-out", target)
    assert target.read_text() == "id_i,id_j\n1,2\n3,4\n"


def test_exit_codes(capsys, files):
    bad = files("bad.csv", "id,x,d\n1,zz,1\n")
    code, _, err = run(capsys, "estimate", bad)
    assert code == 2 and "bad.csv:2" in err
    o = files("o.csv", "id,x,d\n1,0,0\n2,1,0\n")
    e = files("e.csv", "id_i,id_j\n1,2\n")
    code, _, err = run(capsys, "estimate", o, e)
    assert code == 3 and "exceeds reported degree" in err
    assert run(capsys, "estimate", str(files("x", "")) + ".missing")[0] == 2


def test_absent_degrees_warn(capsys, files):
    o = files("o.csv", "id,x\n1,0\n2,1\n3,1\n")
    code, out, err = run(capsys, "estimate", o)
    assert code == 0
    assert "WARNING" in err and "n-1" in err


def test_global_degree_bound(capsys, four_file):
    _, rep = solve_json(capsys, "estimate", four_file, "--global-degree-bound", "3", "--assume-homoskedastic")
    assert rep["estimates"]["v2_prime"]["variance"] == pytest.approx(0.25)
    assert rep["config"]["global_degree_bound"] == 3


def test_time_limit_exit_code(capsys, files):
    rng = np.random.default_rng(2)
    rows = "".join(f"{k},{rng.normal():.8f},3\n" for k in range(400))
    path = files("o.csv", "id,x,d\n" + rows)
    code, out, _ = run(capsys, "solve", path, "--time-limit", "1e-6")
    status = dict(l.split(": ", 1) for l in out.splitlines() if ": " in l)["status"]
    assert (code, status) in ((0, "optimal"), (4, "time_limit"), (4, "gap_limit"))


def test_simulate_reproducible_and_check(capsys, files, tmp_path):
    cfg = files("c.json", json.dumps({"study": "coverage", "n": 30, "replicates": 5, "seed": 3}))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "simulate", cfg, "--threads", "1", "-o", a)[0] == 0
    assert run(capsys, "simulate", cfg, "--threads", "1", "-o", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(capsys, "simulate", cfg, "--seed", "4", "-o", b)[0] == 0
    assert a.read_bytes() != b.read_bytes()
    # an impossible expectation trips --check but not the plain run
    strict = files("s.json", json.dumps({"study": "coverage", "n": 30, "replicates": 5,
                                         "edge_scale": 0.0, "naive_check": "undercover"}))
    assert run(capsys, "simulate", strict)[0] == 0
    assert run(capsys, "simulate", strict, "--check")[0] != 0


def test_simulate_schema_error(capsys, files):
    cfg = files("c.json", json.dumps({"study": "coverage", "n": 30, "replicates": 5, "oops": 1}))
    code, _, err = run(capsys, "simulate", cfg)
    assert code == 2 and "oops" in err
