"""Acceptance criteria, one test each.

Every test prints a single ``[criterion k] PASS|FAIL ...`` line. Run the
whole suite with ``pytest tests/test_acceptance.py -v`` or as a script with
``python tests/test_acceptance.py``.

Criterion 4 runs its reduced variant (n=200, 500 replicates) by default.
Set ``DEPBOUND_FULL_COVERAGE=1`` for the full n=1000, 2000-replicate study
(about two hours on one core), or point ``DEPBOUND_COVERAGE_REPORT`` at a
report written by ``depbound simulate configs/coverage_full.json`` to check
that report instead of rerunning it.
"""
from __future__ import annotations

import functools
import json
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from depbound.core import ObservedData, sample_variance
from depbound.estimators import v2, v2_prime
from depbound.inference import wald_ci
from depbound.simulation import (
    EdgeFactorModel,
    generate_graph,
    generate_outcomes,
    parse_config,
    run_consistency_study,
    run_coverage_study,
    run_normality_study,
)
from depbound.solver import (
    OPTIMAL,
    ProblemInstance,
    SolverConfig,
    brute_force,
    build_v1_instance,
    build_v2_instance,
    lp_relaxation_bound,
    max_v2_fast_path,
    solve,
)

ROOT = Path(__file__).resolve().parents[1]


def report(k: int, ok: bool, detail: str) -> None:
    line = f"[criterion {k}] {'PASS' if ok else 'FAIL'}  {detail}"
    capman = _CAPTURE.get("capsys")
    if capman is not None:
        with capman.disabled():
            print(line)
    else:
        print(line)


_CAPTURE: dict = {}


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    _CAPTURE["capsys"] = capsys
    yield
    _CAPTURE.pop("capsys", None)


# --- criteria 1 and 7 share the instance suite ---------------------------

def _suite_instance(rng):
    n = int(rng.integers(4, 9))
    dyadic = bool(rng.random() < 0.5)
    if dyadic:
        # eighths with n a power of two keep the mean and all products dyadic
        n = 4 if n < 6 else 8
        x = rng.integers(-8, 9, size=n) / 8
    else:
        x = rng.uniform(-1, 1, size=n)
    caps = rng.integers(0, n, size=n)
    deg = np.zeros(n, dtype=int)
    forced = []
    for i in range(n):
        for j in range(i + 1, n):
            # keep a forced edge only while it stays feasible
            if rng.random() < 0.15 and deg[i] < caps[i] and deg[j] < caps[j]:
                forced.append((i, j))
                deg[i] += 1
                deg[j] += 1
    return build_v1_instance(ObservedData(x, caps, tuple(forced))), dyadic


@functools.lru_cache(maxsize=None)
def oracle_suite():
    rng = np.random.default_rng(20240101)
    rows = []
    for _ in range(500):
        inst, dyadic = _suite_instance(rng)
        rows.append((inst, dyadic, brute_force(inst).objective))
    return rows


def criterion_1():
    start = time.perf_counter()
    bad = []
    n_dyadic = 0
    for k, (inst, dyadic, ref) in enumerate(oracle_suite()):
        res = solve(inst)
        n_dyadic += dyadic
        if dyadic:
            ok = res.objective == ref
        else:
            ok = abs(res.objective - ref) <= 1e-12 * max(1.0, abs(ref))
        if not ok or res.status != OPTIMAL:
            bad.append(k)
    dt = time.perf_counter() - start
    ok = not bad and dt < 60
    return ok, f"500 instances ({n_dyadic} dyadic, exact), {len(bad)} mismatches, {dt:.1f}s"


def criterion_7():
    worst = math.inf
    bad = 0
    for inst, _, ref in oracle_suite():
        lb = lp_relaxation_bound(inst)
        worst = min(worst, lb - ref)
        bad += lb < ref
    tri = ProblemInstance(3, np.ones((3, 3)), [1, 1, 1], unit_weights=True)
    lb, opt = lp_relaxation_bound(tri), solve(tri).objective
    ok = bad == 0 and lb == 1.5 and opt == 1
    return ok, f"bound >= optimum on all 500 (min slack {worst:.3g}); triangle bound {lb}, optimum {opt}"


# --- criterion 2 -----------------------------------------------------------

def criterion_2():
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    chain_bad = eq_bad = fast = 0
    for k in range(200):
        total = int(rng.integers(6, 60))
        deg = int(rng.integers(1, min(6, total - 1) + 1))
        style = "regular" if (total * deg) % 2 == 0 and rng.random() < 0.5 else "bounded_random"
        graph = generate_graph(total, deg, style, seed=k)
        # half the instances sample a subset, so reported degrees exceed sample degrees
        if rng.random() < 0.5:
            m = int(rng.integers(3, total + 1))
            sample = tuple(sorted(rng.choice(total, size=m, replace=False).tolist()))
        else:
            sample = None
        model = EdgeFactorModel(graph, 0.0, 1.0, 1.0, sample)
        data = generate_outcomes(model, seed=k, p_obs=float(rng.random()))
        oracle = v2(model.sample_graph(), data).value
        res = solve(build_v2_instance(data))
        mx = v2(res.best_matrix, data).value
        closed = v2_prime(data).value
        if not (oracle <= mx <= closed) or res.status != OPTIMAL:
            chain_bad += 1
        if max_v2_fast_path(data) is not None:
            fast += 1
            eq_bad += mx != closed
    dt = time.perf_counter() - start
    ok = chain_bad == 0 and eq_bad == 0 and dt < 60
    return ok, (f"200 instances: {chain_bad} chain violations, fast path on {fast} "
                f"with {eq_bad} inequalities, {dt:.1f}s")


# --- criterion 3 -----------------------------------------------------------

def criterion_3():
    cfg = parse_config({"study": "consistency", "n": [100, 400, 1600], "replicates": 2000,
                        "max_degree": 2, "style": "regular", "vertex_scale": 1.0,
                        "edge_scale": 1.0, "seed": 11})
    rows = run_consistency_study(cfg).results["per_size"]
    bias = [abs(rows[s]["mean_error"]) for s in ("100", "400", "1600")]
    rmse = [rows[s]["rmse"] for s in ("100", "400", "1600")]
    ok = bias[2] < bias[0] and rmse[2] < rmse[0]
    return ok, ("|bias| " + " > ".join(f"{b:.4f}" for b in bias)
                + "; rmse " + " > ".join(f"{r:.4f}" for r in rmse))


# --- criterion 4 -----------------------------------------------------------

def _coverage_verdict(rep: dict, label: str):
    cfg, res = rep["config"], rep["results"]
    r = res["replicates"]
    floor = 1 - cfg["alpha"] - 3 * math.sqrt(cfg["alpha"] * (1 - cfg["alpha"]) / r)
    per = res["per_estimator"]
    cons = {k: per[k]["coverage"] for k in ("v1", "v2", "v2_prime")}
    naive = per["naive"]["coverage"]
    ok = (all(c >= floor for c in cons.values()) and naive <= 0.90
          and not res["flagged_replicates"] and res["ordering_violations"] == 0)
    detail = (f"{label}: coverage " + ", ".join(f"{k} {v:.3f}" for k, v in cons.items())
              + f" (floor {floor:.3f}); naive {naive:.3f} (<= 0.90); "
              f"{len(res['flagged_replicates'])} non-optimal solves")
    return ok, detail


def criterion_4():
    path = os.environ.get("DEPBOUND_COVERAGE_REPORT")
    if path:
        return _coverage_verdict(json.loads(Path(path).read_text()), f"report {path}")
    name = "coverage_full.json" if os.environ.get("DEPBOUND_FULL_COVERAGE") else "coverage_ci.json"
    cfg = parse_config(json.loads((ROOT / "configs" / name).read_text()))
    start = time.perf_counter()
    rep = json.loads(run_coverage_study(cfg).to_json())
    dt = time.perf_counter() - start
    ok, detail = _coverage_verdict(rep, f"n={cfg.n}, {cfg.replicates} replicates, {dt:.0f}s")
    if name == "coverage_ci.json":
        ok = ok and dt < 600
    return ok, detail


# --- criterion 5 -----------------------------------------------------------

def criterion_5():
    n, p = 1022, 0.328
    var = p * (1 - p) / n
    se = math.sqrt(var)
    ci = wald_ci(p, var, 0.05)
    # the same value from a concrete 0/1 sample whose mean rounds to 0.328
    x = np.r_[np.ones(335), np.zeros(n - 335)]
    se_data = math.sqrt(sample_variance(x) / n)
    ok = (round(se, 4) == 0.0147 and round(se_data, 4) == 0.0147
          and (round(ci.lower, 3), round(ci.upper, 3)) == (0.299, 0.357))
    return ok, f"naive SE {se:.4f}, CI ({ci.lower:.3f}, {ci.upper:.3f})"


# --- criterion 6 -----------------------------------------------------------

def criterion_6():
    cfg = parse_config({"study": "normality", "n": 1000, "replicates": 5000, "max_degree": 2,
                        "vertex_scale": 1.0, "edge_scale": 1.0, "seed": 13})
    res = run_normality_study(cfg).results
    ok = res["ks_pvalue"] > 0.001
    return ok, f"KS statistic {res['ks_statistic']:.4f}, p-value {res['ks_pvalue']:.3f} (> 0.001)"


# --- criterion 8 -----------------------------------------------------------

def criterion_8(tmp: Path):
    cfg = tmp / "repro.json"
    cfg.write_text(json.dumps({"study": "coverage", "n": 80, "replicates": 40, "p_obs": 0.5}))
    outs = []
    for k in range(2):
        out = tmp / f"run{k}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "depbound.cli", "simulate", str(cfg), "--seed", "99",
             "--threads", "1", "-o", str(out)],
            capture_output=True, text=True,
        )
        if proc.returncode != 0:
            return False, f"simulate exited {proc.returncode}: {proc.stderr.strip()}"
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1]
    return ok, f"two runs, {len(outs[0])} bytes each, {'identical' if ok else 'different'}"


# --- pytest wrappers -------------------------------------------------------

def _check(k, result):
    ok, detail = result
    report(k, ok, detail)
    assert ok, detail


def test_criterion_1_oracle_equivalence():
    _check(1, criterion_1())


def test_criterion_2_homoskedastic_chain():
    _check(2, criterion_2())


def test_criterion_3_consistency():
    _check(3, criterion_3())


def test_criterion_4_coverage():
    _check(4, criterion_4())


def test_criterion_5_table_values():
    _check(5, criterion_5())


def test_criterion_6_normality():
    _check(6, criterion_6())


def test_criterion_7_lp_dominance():
    _check(7, criterion_7())


def test_criterion_8_reproducible_simulate(tmp_path):
    _check(8, criterion_8(tmp_path))


if __name__ == "__main__":
    import tempfile

    failures = 0
    runs = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7]
    for k, fn in enumerate(runs, start=1):
        ok, detail = fn()
        report(k, ok, detail)
        failures += not ok
    with tempfile.TemporaryDirectory() as d:
        ok, detail = criterion_8(Path(d))
    report(8, ok, detail)
    failures += not ok
    sys.exit(1 if failures else 0)
