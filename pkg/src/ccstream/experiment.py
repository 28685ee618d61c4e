"""Experiment harness: single runs, sweeps, CSV output, and figures.

Every run produces one RunRecord row in a fixed schema so downstream
plotting stays stable. Relative error is always measured against the
greedy pivot cost under the same rank seed, which isolates pruning and
sampling error from the pivot order's own variance.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from statistics import mean, stdev

from .clustering import pivot_clustering
from .errors import CapacityError
from .estimators import (
    EstimatorParams,
    estimate_cost,
    matched_pair_budget,
    simple_sampling,
)
from .exact import clustering_cost, opt_cost
from .mismatch import pruned_clustering
from .similarity import EmbeddingOracle, load_edgelist, load_embeddings
from .stream import Accounting, NodeStream
from .synthetic import gnp, planted

CSV_COLUMNS = [
    "algorithm", "k", "alpha", "epsilon", "space_mode", "space_param",
    "seed", "estimate", "baseline", "rel_error", "passes", "peak_words",
    "oracle_calls", "wall_ms",
]

ALGORITHMS = ("pivot", "pruned-pivot", "c4approx", "simple-sampling", "exact")


@dataclass(frozen=True)
class SourceSpec:
    """Where the graph comes from; picklable so workers can rebuild it."""

    kind: str                      # "edgelist" | "embeddings" | "gnp" | "planted"
    path: str | None = None
    theta: float = 0.5
    n: int = 0
    p: float = 0.0
    clusters: int = 1
    p_in: float = 0.0
    p_out: float = 0.0
    graph_seed: int = 0

    def build(self, theta=None):
        if self.kind == "edgelist":
            oracle = load_edgelist(self.path)
        elif self.kind == "embeddings":
            vectors = load_embeddings(self.path)
            oracle = EmbeddingOracle(vectors, self.theta if theta is None else theta)
        elif self.kind == "gnp":
            oracle = gnp(self.n, self.p, self.graph_seed)
        elif self.kind == "planted":
            oracle = planted(self.n, self.clusters, self.p_in, self.p_out,
                             self.graph_seed)
        else:
            raise ValueError(f"unknown source kind {self.kind!r}")
        return NodeStream(oracle.n), oracle


@dataclass
class RunRecord:
    algorithm: str
    k: int
    alpha: float
    epsilon: float
    space_mode: str
    space_param: float | None
    seed: object
    estimate: object
    baseline: float | None
    rel_error: float | None
    passes: object
    peak_words: object
    oracle_calls: object
    wall_ms: object

    def row(self):
        return [_cell(getattr(self, col)) for col in CSV_COLUMNS]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _rel_error(estimate, baseline):
    if baseline is None or not isinstance(estimate, (int, float)):
        return None
    if baseline <= 0:
        return None
    return abs(estimate - baseline) / baseline


def pivot_cost(oracle, params: EstimatorParams) -> int:
    """Greedy pivot clustering cost under this run's rank seed."""
    rf = params.rank_function(oracle.n)
    return clustering_cost(oracle, pivot_clustering(oracle, rf).blocks())


def run_algorithm(algorithm, stream, oracle, params: EstimatorParams, *,
                  baseline=None, pairs=None, reps=1, timing=False,
                  extra_passes=0) -> RunRecord:
    """One algorithm invocation folded into a record row.

    Infeasible runs keep their row (estimate carries an error token) so a
    sweep survives individual failures.
    """
    acct = Accounting()
    calls_before = oracle.query_count
    started = time.perf_counter()
    estimate: object
    try:
        if algorithm == "pivot":
            estimate = float(pivot_cost(oracle, params))
            baseline = None
        elif algorithm == "pruned-pivot":
            rf = params.rank_function(oracle.n)
            blocks = pruned_clustering(oracle, rf, params.k).blocks()
            estimate = float(clustering_cost(oracle, blocks))
        elif algorithm == "c4approx":
            estimate = estimate_cost(stream, params, oracle, acct, reps=reps)
        elif algorithm == "simple-sampling":
            q = pairs if pairs else matched_pair_budget(stream.n, params)
            rf = params.rank_function(oracle.n)
            estimate = simple_sampling(stream, q, params.k, rf, oracle, acct,
                                       seed=params.seed)
        elif algorithm == "exact":
            estimate = float(opt_cost(oracle)[0])
            baseline = None
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
    except (ValueError, CapacityError) as exc:
        estimate = f"ERR:{type(exc).__name__}"
    wall = (time.perf_counter() - started) * 1000.0
    return RunRecord(
        algorithm=algorithm,
        k=params.k,
        alpha=params.alpha,
        epsilon=params.epsilon,
        space_mode=params.space_mode,
        space_param=params.space_param,
        seed=params.seed,
        estimate=estimate,
        baseline=baseline,
        rel_error=_rel_error(estimate, baseline),
        passes=acct.passes_used + extra_passes,
        peak_words=acct.peak_words,
        oracle_calls=oracle.query_count - calls_before,
        wall_ms=int(round(wall)) if timing else 0,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceSpec
    sweep: str                     # "space" | "k" | "theta"
    values: tuple
    algorithms: tuple
    reps: int = 10
    k: int = 15
    alpha: float = 0.5
    epsilon: float = 0.1
    space_mode: str = "budget"
    space_param: float | None = 0.1
    normalize: bool = False
    master_seed: int = 0
    estimator_reps: int = 1
    pairs: int | None = None
    workers: int = 1
    timing: bool = False
    extra_passes: int = 0


def _params_for(cfg: ExperimentConfig, value, seed) -> EstimatorParams:
    k = cfg.k
    mode, param = cfg.space_mode, cfg.space_param
    if cfg.sweep == "k":
        k = int(value)
    elif cfg.sweep == "space":
        mode, param = "budget", float(value)
    return EstimatorParams(
        k=k, alpha=cfg.alpha, epsilon=cfg.epsilon, seed=seed,
        space_mode=mode, space_param=param, normalize_output=cfg.normalize,
    )


def _run_value(cfg: ExperimentConfig, value, seeds):
    theta = float(value) if cfg.sweep == "theta" else None
    stream, oracle = cfg.source.build(theta=theta)
    rows = []
    for seed in seeds:
        params = _params_for(cfg, value, seed)
        need_baseline = any(a not in ("pivot", "exact") for a in cfg.algorithms)
        baseline = float(pivot_cost(oracle, params)) if need_baseline else None
        for algorithm in cfg.algorithms:
            record = run_algorithm(
                algorithm, stream, oracle, params,
                baseline=baseline, pairs=cfg.pairs, reps=cfg.estimator_reps,
                timing=cfg.timing, extra_passes=cfg.extra_passes,
            )
            rows.append((str(value), record))
    return rows


def run_experiment(cfg: ExperimentConfig):
    """All (algorithm, sweep value, seed) runs plus per-group summary rows."""
    seeds = [cfg.master_seed + i for i in range(cfg.reps)]
    tasks = [(value, seeds) for value in cfg.values]
    tagged = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_value, cfg, value, chunk)
                       for value, chunk in _chunked(tasks, cfg.workers)]
            for fut in futures:
                tagged.extend(fut.result())
    else:
        for value, chunk in tasks:
            tagged.extend(_run_value(cfg, value, chunk))
    tagged.sort(key=lambda vr: (vr[1].algorithm, _numeric(vr[0]), _numeric(vr[1].seed)))
    records = [r for _, r in tagged]
    summaries = _summaries(tagged)
    return records + summaries, tagged


def _chunked(tasks, workers):
    """Split each value's seed list so the pool has enough tasks to balance."""
    out = []
    for value, seeds in tasks:
        size = max(1, len(seeds) // max(1, workers))
        for i in range(0, len(seeds), size):
            out.append((value, seeds[i:i + size]))
    return out


def _numeric(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        return float("inf")


def _summaries(tagged):
    groups = {}
    for value, record in tagged:
        groups.setdefault((record.algorithm, value), []).append(record)
    rows = []
    for (algorithm, value), records in sorted(
        groups.items(), key=lambda kv: (kv[0][0], _numeric(kv[0][1]))
    ):
        ests = [r.estimate for r in records if isinstance(r.estimate, float)]
        rels = [r.rel_error for r in records if r.rel_error is not None]
        base = records[0]
        for stat, est_v, rel_v in (
            ("mean", mean(ests) if ests else None, mean(rels) if rels else None),
            ("sd",
             stdev(ests) if len(ests) > 1 else 0.0 if ests else None,
             stdev(rels) if len(rels) > 1 else 0.0 if rels else None),
        ):
            rows.append(RunRecord(
                algorithm=algorithm, k=base.k, alpha=base.alpha,
                epsilon=base.epsilon, space_mode=base.space_mode,
                space_param=base.space_param, seed=stat, estimate=est_v,
                baseline=None, rel_error=rel_v, passes=None, peak_words=None,
                oracle_calls=None, wall_ms=None,
            ))
    return rows


def write_csv(records, out):
    """Write records (header first) to a path or text buffer."""
    owned = isinstance(out, str)
    fh = open(out, "w", newline="", encoding="utf-8") if owned else out
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.row())
    finally:
        if owned:
            fh.close()


def csv_text(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def render_figure(tagged, sweep: str, png_path: str):
    """Mean relative error with a +-1 SD band, plus the SD trend, per
    algorithm across the sweep. Saved next to the CSV."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = {}
    for value, record in tagged:
        y = record.rel_error if record.rel_error is not None else (
            record.estimate if isinstance(record.estimate, float) else None)
        if y is None:
            continue
        series.setdefault(record.algorithm, {}).setdefault(_numeric(value), []).append(y)

    fig, (ax_mean, ax_sd) = plt.subplots(1, 2, figsize=(10, 4))
    for algorithm in sorted(series):
        points = sorted(series[algorithm].items())
        xs = [x for x, _ in points]
        means = [mean(ys) for _, ys in points]
        sds = [stdev(ys) if len(ys) > 1 else 0.0 for _, ys in points]
        ax_mean.plot(xs, means, marker="o", label=algorithm)
        ax_mean.fill_between(xs, [m - s for m, s in zip(means, sds)],
                             [m + s for m, s in zip(means, sds)], alpha=0.2)
        ax_sd.plot(xs, sds, marker="o", label=algorithm)
    ax_mean.set_xlabel(sweep)
    ax_mean.set_ylabel("relative error vs pivot baseline")
    ax_mean.set_title("mean ± 1 SD")
    ax_sd.set_xlabel(sweep)
    ax_sd.set_ylabel("SD of relative error")
    ax_sd.set_title("spread")
    ax_mean.legend()
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path
