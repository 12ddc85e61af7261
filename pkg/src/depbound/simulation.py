"""Synthetic dependent data with a known dependency graph, and Monte Carlo studies.

Outcomes follow an edge-factor model: every unit has its own uniform shock
and every edge of the true graph carries a shared uniform factor that enters
both endpoints,

    X_i = mu + a * eps_i + b * sum_{e containing i} U_e.

Units that share no edge are independent, so the true graph is a dependency
graph, and the variance of the sample mean has a closed form.

Replicate ``k`` of a study at sample size ``n`` draws from its own stream
``SeedSequence(seed, spawn_key=(1, n, k))``; the true graph at size ``n``
comes from ``spawn_key=(0, n)``. Results therefore do not depend on how
replicates are spread over worker processes.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import networkx as nx
import numpy as np
from scipy import stats

from .core import AdjacencyMatrix, ObservedData, induced_subgraph, validate
from .estimators import naive, v1, v2, v2_prime
from .inference import critical_value
from .solver import OPTIMAL, SolverConfig, build_v1_instance, build_v2_instance, max_v2_fast_path, solve

STYLES = ("regular", "bounded_random")
STUDIES = ("coverage", "consistency", "normality")
ESTIMATORS = ("naive", "v1", "v2", "v2_prime", "v1_oracle", "v2_oracle")
CONSERVATIVE = ("v1", "v2", "v2_prime")


@dataclass(frozen=True)
class EdgeFactorModel:
    """True graph, target mean and the two noise scales.

    ``sample`` lists the sampled vertices; None samples every vertex.
    """

    graph: AdjacencyMatrix
    mu: float = 0.0
    vertex_scale: float = 1.0
    edge_scale: float = 1.0
    sample: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.vertex_scale < 0 or self.edge_scale < 0:
            raise ValueError("noise scales must be nonnegative")
        if self.sample is not None:
            s = tuple(int(v) for v in self.sample)
            if len(set(s)) != len(s) or any(not 0 <= v < self.graph.n for v in s):
                raise ValueError("sample must list distinct vertices of the graph")
            object.__setattr__(self, "sample", s)

    @property
    def sampled(self) -> np.ndarray:
        if self.sample is None:
            return np.arange(self.graph.n)
        return np.array(self.sample, dtype=np.int64)

    def sample_graph(self) -> AdjacencyMatrix:
        """The true graph induced on the sample (the oracle matrix)."""
        if self.sample is None:
            return self.graph
        return induced_subgraph(self.graph, self.sample)


def _int_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def generate_graph(n: int, max_degree: int, style: str = "regular", seed=None) -> AdjacencyMatrix:
    """Random graph with every degree at most ``max_degree``.

    ``regular`` graphs have every degree exactly ``max_degree``. The
    ``bounded_random`` style pairs up ``max_degree`` stubs per vertex at
    random and drops loops and repeated pairs.
    """
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    if max_degree < 0 or max_degree > n - 1:
        raise ValueError(f"max degree {max_degree} is outside 0..{n - 1}")
    if style not in STYLES:
        raise ValueError(f"unknown graph style {style!r}; expected one of {', '.join(STYLES)}")
    if isinstance(seed, np.random.SeedSequence):
        seq = seed
    else:
        seq = np.random.SeedSequence(seed)
    if style == "regular":
        if (n * max_degree) % 2:
            raise ValueError(f"no {max_degree}-regular graph on {n} vertices (odd degree sum)")
        if max_degree == 0:
            return AdjacencyMatrix.empty(n)
        g = nx.random_regular_graph(max_degree, n, seed=_int_seed(seq))
        return AdjacencyMatrix.from_edges(n, g.edges())
    rng = np.random.default_rng(seq)
    stubs = rng.permutation(np.repeat(np.arange(n), max_degree))
    if stubs.size % 2:
        stubs = stubs[:-1]
    pairs = stubs.reshape(-1, 2)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    return AdjacencyMatrix.from_edges(n, pairs.tolist())


def generate_outcomes(model: EdgeFactorModel, seed=None, p_obs: float = 1.0) -> ObservedData:
    """One draw of the sampled outcomes.

    Degrees are the full-graph degrees. Each true edge between sampled units
    is observed independently with probability ``p_obs``; the thinning draw
    is made for every ``p_obs`` so outcomes do not depend on it.
    """
    if not 0.0 <= p_obs <= 1.0:
        raise ValueError("p_obs must lie in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = model.graph
    e = g.edge_array()
    shocks = rng.uniform(-1.0, 1.0, size=g.n)
    factors = rng.uniform(-1.0, 1.0, size=len(e))
    x = model.mu + model.vertex_scale * shocks
    if len(e):
        load = np.bincount(e[:, 0], factors, g.n) + np.bincount(e[:, 1], factors, g.n)
        x = x + model.edge_scale * load
    sampled = model.sampled
    inner = model.sample_graph()
    keep = rng.random(len(inner)) < p_obs
    observed = [p for p, k in zip(sorted(inner.edges), keep.tolist()) if k]
    return ObservedData(x[sampled], g.degrees()[sampled], tuple(observed))


def true_variance(model: EdgeFactorModel) -> float:
    """Exact variance of the sample mean under ``model``."""
    sampled = model.sampled
    m = sampled.size
    a2, b2 = model.vertex_scale ** 2, model.edge_scale ** 2
    deg = model.graph.degrees()[sampled]
    total = m * a2 / 3.0 + b2 * float(deg.sum()) / 3.0 + 2.0 * b2 / 3.0 * len(model.sample_graph())
    return total / (m * m)


# --- study configuration -------------------------------------------------

class ConfigError(ValueError):
    """Invalid study configuration; ``keys`` names the offending entries."""

    def __init__(self, problems: dict[str, str]):
        self.keys = sorted(problems)
        super().__init__("invalid study config: " + "; ".join(f"{k}: {problems[k]}" for k in self.keys))


@dataclass(frozen=True)
class StudyConfig:
    """Declarative description of one study.

    ``n`` is a single size for coverage and normality studies and a list
    of sizes for consistency studies. ``naive_check`` selects what the
    checks expect of the naive interval: nothing, nominal coverage, or
    coverage at most ``1 - 2 * alpha``.
    """

    study: str
    n: int | list[int]
    replicates: int
    max_degree: int = 2
    style: str = "regular"
    mu: float = 0.0
    vertex_scale: float = 1.0
    edge_scale: float = 1.0
    alpha: float = 0.05
    p_obs: float = 0.5
    seed: int = 0
    naive_check: str = "none"
    gap: float = 1e-9
    time_limit: float | None = 60.0

    @property
    def sizes(self) -> list[int]:
        return list(self.n) if isinstance(self.n, list) else [self.n]

    def solver_config(self) -> SolverConfig:
        return SolverConfig(gap=self.gap, time_limit=self.time_limit, threads=1)


_TYPES = {
    "study": str, "n": (int, list), "replicates": int, "max_degree": int, "style": str,
    "mu": (int, float), "vertex_scale": (int, float), "edge_scale": (int, float),
    "alpha": (int, float), "p_obs": (int, float), "seed": int, "naive_check": str,
    "gap": (int, float), "time_limit": (int, float, type(None)),
}
_REQUIRED = ("study", "n", "replicates")


def parse_config(raw: dict) -> StudyConfig:
    """Check ``raw`` against the schema and build a :class:`StudyConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError({"<root>": "expected a JSON object"})
    problems: dict[str, str] = {}
    known = {f.name for f in fields(StudyConfig)}
    for k in raw:
        if k not in known:
            problems[k] = "unknown key"
    for k in _REQUIRED:
        if k not in raw:
            problems[k] = "required key missing"
    for k, v in raw.items():
        if k in _TYPES and (isinstance(v, bool) or not isinstance(v, _TYPES[k])):
            problems[k] = f"wrong type {type(v).__name__}"
    if problems:
        raise ConfigError(problems)
    cfg = StudyConfig(**raw)
    if cfg.study not in STUDIES:
        problems["study"] = f"must be one of {', '.join(STUDIES)}"
    if isinstance(cfg.n, list):
        if cfg.study != "consistency":
            problems["n"] = "a list of sizes is only allowed for consistency studies"
        elif not cfg.n or any(isinstance(v, bool) or not isinstance(v, int) for v in cfg.n):
            problems["n"] = "must be a nonempty list of integers"
    if any(isinstance(v, int) and v < 2 for v in cfg.sizes):
        problems["n"] = "sizes must be at least 2"
    if cfg.replicates < 1:
        problems["replicates"] = "must be positive"
    if cfg.style not in STYLES:
        problems["style"] = f"must be one of {', '.join(STYLES)}"
    if cfg.max_degree < 0:
        problems["max_degree"] = "must be nonnegative"
    if cfg.vertex_scale < 0:
        problems["vertex_scale"] = "must be nonnegative"
    if cfg.edge_scale < 0:
        problems["edge_scale"] = "must be nonnegative"
    if not 0 < cfg.alpha < 1:
        problems["alpha"] = "must lie in (0, 1)"
    if not 0 <= cfg.p_obs <= 1:
        problems["p_obs"] = "must lie in [0, 1]"
    if cfg.naive_check not in ("none", "nominal", "undercover"):
        problems["naive_check"] = "must be none, nominal or undercover"
    if cfg.gap < 0:
        problems["gap"] = "must be nonnegative"
    if cfg.time_limit is not None and cfg.time_limit <= 0:
        problems["time_limit"] = "must be positive"
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> StudyConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError({"<file>": f"not valid JSON ({exc.msg} at line {exc.lineno})"}) from None
    return parse_config(raw)


# --- replicates ------------------------------------------------------------

def replicate_seed(seed: int, n: int, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(1, n, k))


def study_model(cfg: StudyConfig, n: int) -> EdgeFactorModel:
    graph = generate_graph(n, cfg.max_degree, cfg.style, np.random.SeedSequence(cfg.seed, spawn_key=(0, n)))
    return EdgeFactorModel(graph, cfg.mu, cfg.vertex_scale, cfg.edge_scale)


def _max_v2_matrix(data: ObservedData, solver_cfg: SolverConfig):
    fast = max_v2_fast_path(data)
    if fast is not None:
        return fast, OPTIMAL
    res = solve(build_v2_instance(data), solver_cfg)
    return res.best_matrix, res.status


def coverage_replicate(args) -> dict:
    """All estimates and interval outcomes for one replicate."""
    model, p_obs, seed, solver_cfg = args
    data = generate_outcomes(model, np.random.default_rng(seed), p_obs)
    report = validate(data)
    if not report:
        raise RuntimeError(f"generator produced inconsistent data: {report.describe()}")
    oracle = model.sample_graph()
    res = solve(build_v1_instance(data), solver_cfg)
    a2, status2 = _max_v2_matrix(data, solver_cfg)
    values = {
        "naive": naive(data).value,
        "v1": v1(res.best_matrix, data).value,
        "v2": v2(a2, data).value,
        "v2_prime": v2_prime(data).value,
        "v1_oracle": v1(oracle, data).value,
        "v2_oracle": v2(oracle, data).value,
    }
    return {
        "mean": float(np.mean(data.outcomes)),
        "values": values,
        "status": {"v1": res.status, "v2": status2},
    }


def _oracle_replicate(args) -> tuple[float, float]:
    model, seed = args
    data = generate_outcomes(model, np.random.default_rng(seed), 1.0)
    return float(np.mean(data.outcomes)), v1(model.sample_graph(), data).value


def _run_all(func, jobs: list, threads: int) -> list:
    # map keeps submission order, so the reduction below is the same for any pool size
    if threads <= 1 or len(jobs) < 2:
        return [func(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, jobs, chunksize=chunk))


@dataclass
class SimulationReport:
    config: dict
    truth: dict
    results: dict
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def mc_band(p: float, replicates: int) -> float:
    """Three binomial standard errors around rate ``p``."""
    return 3.0 * math.sqrt(p * (1.0 - p) / replicates)


def run_coverage_study(cfg: StudyConfig, threads: int = 1) -> SimulationReport:
    n = cfg.sizes[0]
    model = study_model(cfg, n)
    truth = true_variance(model)
    solver_cfg = cfg.solver_config()
    jobs = [(model, cfg.p_obs, replicate_seed(cfg.seed, n, k), solver_cfg) for k in range(cfg.replicates)]
    rows = _run_all(coverage_replicate, jobs, threads)

    z = critical_value(cfg.alpha)
    per = {}
    for name in ESTIMATORS:
        vals = np.array([r["values"][name] for r in rows])
        means = np.array([r["mean"] for r in rows])
        ok = vals >= 0
        half = z * np.sqrt(np.where(ok, vals, 0.0))
        covered = ok & (np.abs(means - model.mu) <= half)
        per[name] = {
            "mean_n_estimate": float(np.mean(n * vals)),
            "coverage": float(np.mean(covered)),
            "mean_width": float(np.mean(2.0 * half)),
            "under_truth": float(np.mean(vals < truth)),
            "negative": int(np.sum(~ok)),
        }
    flagged = [k for k, r in enumerate(rows) if any(s != OPTIMAL for s in r["status"].values())]
    chain = sum(
        1 for r in rows
        if not (r["values"]["v1"] >= r["values"]["v1_oracle"]
                and r["values"]["v2_oracle"] <= r["values"]["v2"] <= r["values"]["v2_prime"])
    )
    nominal = 1.0 - cfg.alpha
    band = mc_band(nominal, cfg.replicates)
    checks = {f"{name}_coverage_at_least_nominal": per[name]["coverage"] >= nominal - band for name in CONSERVATIVE}
    checks["all_replicates_optimal"] = not flagged
    checks["ordering_holds"] = chain == 0
    if cfg.naive_check == "nominal":
        checks["naive_coverage_nominal"] = abs(per["naive"]["coverage"] - nominal) <= band
    elif cfg.naive_check == "undercover":
        checks["naive_undercovers"] = per["naive"]["coverage"] <= 1.0 - 2.0 * cfg.alpha
    return SimulationReport(
        config=asdict(cfg),
        truth={"n": n, "n_var_mean": n * truth, "edges": len(model.graph)},
        results={
            "replicates": cfg.replicates,
            "per_estimator": per,
            "flagged_replicates": flagged,
            "ordering_violations": chain,
            "mc_band": band,
        },
        checks=checks,
    )


def run_consistency_study(cfg: StudyConfig, threads: int = 1) -> SimulationReport:
    """Bias and RMSE of ``n * V1`` at the true graph against ``n * var(mean)``."""
    rows = {}
    truths = {}
    for n in cfg.sizes:
        model = study_model(cfg, n)
        truth = n * true_variance(model)
        jobs = [(model, replicate_seed(cfg.seed, n, k)) for k in range(cfg.replicates)]
        draws = _run_all(_oracle_replicate, jobs, threads)
        err = np.array([n * v for _, v in draws]) - truth
        rows[str(n)] = {
            "mean_error": float(np.mean(err)),
            "rmse": float(np.sqrt(np.mean(err * err))),
            "mean_n_estimate": float(truth + np.mean(err)),
        }
        truths[str(n)] = truth
    first, last = rows[str(cfg.sizes[0])], rows[str(cfg.sizes[-1])]
    checks = {}
    if cfg.replicates > 1 and len(cfg.sizes) > 1:
        checks["rmse_shrinks"] = last["rmse"] < first["rmse"]
        checks["bias_shrinks"] = abs(last["mean_error"]) < abs(first["mean_error"])
    return SimulationReport(
        config=asdict(cfg),
        truth={"n_var_mean": truths},
        results={"replicates": cfg.replicates, "per_size": rows},
        checks=checks,
    )


KS_LEVEL = 0.001


def run_normality_study(cfg: StudyConfig, threads: int = 1) -> SimulationReport:
    """Kolmogorov-Smirnov test of the standardized sample mean."""
    n = cfg.sizes[0]
    model = study_model(cfg, n)
    truth = true_variance(model)
    jobs = [(model, replicate_seed(cfg.seed, n, k)) for k in range(cfg.replicates)]
    means = np.array([m for m, _ in _run_all(_oracle_replicate, jobs, threads)])
    zs = (means - model.mu) / math.sqrt(truth)
    ks = stats.kstest(zs, "norm")
    return SimulationReport(
        config=asdict(cfg),
        truth={"n": n, "n_var_mean": n * truth},
        results={
            "replicates": cfg.replicates,
            "ks_statistic": float(ks.statistic),
            "ks_pvalue": float(ks.pvalue),
            "z_mean": float(np.mean(zs)),
            "z_sd": float(np.std(zs)),
        },
        checks={"ks_not_rejected": float(ks.pvalue) > KS_LEVEL},
    )


def run_study(cfg: StudyConfig, threads: int = 1) -> SimulationReport:
    runner = {
        "coverage": run_coverage_study,
        "consistency": run_consistency_study,
        "normality": run_normality_study,
    }[cfg.study]
    return runner(cfg, threads)
