"""Command-line front end.

Single-run subcommands emit one CSV row (after the header) in the same
schema the experiment sweeps use; all randomness flows from --seed, so a
repeated invocation reproduces its output byte for byte. Wall times are
reported as 0 unless --timing is given, keeping the default output
deterministic.
"""

from __future__ import annotations

import argparse
import sys

from .errors import CapacityError, ParseError
from .estimators import EstimatorParams
from .exact import opt_cost
from .experiment import (
    ALGORITHMS,
    ExperimentConfig,
    RunRecord,
    SourceSpec,
    pivot_cost,
    render_figure,
    run_algorithm,
    run_experiment,
    write_csv,
)
from .gadgets import disj_gadget, format_points, index_gadget
from .similarity import ExplicitGraphOracle, save_edgelist


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ParseError, CapacityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ccstream",
        description="Estimate correlation-clustering cost over node streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("exact", "pivot", "pruned-pivot", "c4approx", "simple-sampling"):
        p = sub.add_parser(name, help=f"run {name} on one input")
        _add_source_args(p)
        _add_run_args(p)
        if name == "simple-sampling":
            p.add_argument("--pairs", type=int, default=None,
                           help="sampled pair count (default: matched word budget)")
        p.set_defaults(handler=_handle_single, algorithm=name)

    g = sub.add_parser("gadget", help="emit an adversarial instance")
    gsub = g.add_subparsers(dest="gadget_kind", required=True)
    gi = gsub.add_parser("index", help="bit-lookup instance")
    gi.add_argument("--x", required=True, help="bit string, e.g. 1011")
    gi.add_argument("--b", required=True, type=int, help="queried position (1-based)")
    _add_gadget_out(gi)
    gi.set_defaults(handler=_handle_gadget)
    gd = gsub.add_parser("disj", help="set-intersection instance")
    gd.add_argument("--x", required=True, help="first bit string")
    gd.add_argument("--y", required=True, help="second bit string")
    _add_gadget_out(gd)
    gd.set_defaults(handler=_handle_gadget)

    gen = sub.add_parser("generate", help="write a synthetic graph as an edge list")
    _add_source_args(gen, synthetic_only=True)
    gen.add_argument("--out", required=True, help="output edge-list path")
    gen.set_defaults(handler=_handle_generate)

    exp = sub.add_parser("experiment", help="sweep one axis and emit CSV")
    _add_source_args(exp)
    _add_run_args(exp)
    exp.add_argument("--sweep", required=True, choices=("space", "k", "theta"))
    exp.add_argument("--values", required=True,
                     help="comma-separated sweep values, e.g. 0.02,0.04,0.08")
    exp.add_argument("--algorithms", default="c4approx",
                     help=f"comma-separated subset of {ALGORITHMS}")
    exp.add_argument("--seeds", type=int, default=10,
                     help="seed repetitions per sweep value")
    exp.add_argument("--pairs", type=int, default=None)
    exp.add_argument("--workers", type=int, default=1)
    exp.add_argument("--plot", action="store_true",
                     help="render a PNG figure next to the CSV")
    exp.set_defaults(handler=_handle_experiment)

    return parser


def _add_source_args(parser, synthetic_only=False):
    src = parser.add_argument_group("input")
    if not synthetic_only:
        src.add_argument("--input", help="dataset path")
        src.add_argument("--format", choices=("edgelist", "embeddings"),
                         default="edgelist")
        src.add_argument("--theta", type=float, default=0.5,
                         help="cosine threshold for embedding inputs")
        src.add_argument("--count-pass", action="store_true",
                         help="charge one extra pass for headerless input")
    src.add_argument("--gnp", nargs=2, metavar=("N", "P"),
                     help="random graph with N nodes, edge probability P")
    src.add_argument("--planted", nargs=4, metavar=("N", "C", "P_IN", "P_OUT"),
                     help="planted partition: N nodes, C clusters")
    src.add_argument("--graph-seed", type=int, default=0)


def _add_run_args(parser):
    run = parser.add_argument_group("run")
    run.add_argument("--k", type=int, default=15, help="pivot-search depth limit")
    run.add_argument("--alpha", type=float, default=0.5)
    run.add_argument("--epsilon", type=float, default=0.1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--space", default="budget=0.1",
                     help="theory | budget=FRACTION | test=SCALE")
    run.add_argument("--normalize", action="store_true",
                     help="apply the additive-slack output normalization")
    run.add_argument("--reps", type=int, default=1,
                     help="median-of-repetitions inside one estimate")
    run.add_argument("--out", help="CSV output path (default: stdout)")
    run.add_argument("--timing", action="store_true",
                     help="report wall times (breaks byte-for-byte reruns)")


def parse_space(text: str):
    if text == "theory":
        return "theory", None
    for prefix in ("budget", "test"):
        if text.startswith(prefix + "="):
            try:
                return prefix, float(text.split("=", 1)[1])
            except ValueError:
                break
    raise ValueError(f"bad --space value {text!r}; use theory, budget=F, or test=C")


def _source_from(args) -> SourceSpec:
    chosen = [
        bool(getattr(args, "input", None)),
        bool(args.gnp),
        bool(args.planted),
    ]
    if sum(chosen) != 1:
        raise ValueError("choose exactly one input: --input, --gnp, or --planted")
    if getattr(args, "input", None):
        return SourceSpec(kind=args.format, path=args.input, theta=args.theta)
    if args.gnp:
        return SourceSpec(kind="gnp", n=int(args.gnp[0]), p=float(args.gnp[1]),
                          graph_seed=args.graph_seed)
    n, c, p_in, p_out = args.planted
    return SourceSpec(kind="planted", n=int(n), clusters=int(c),
                      p_in=float(p_in), p_out=float(p_out),
                      graph_seed=args.graph_seed)


def _params_from(args) -> EstimatorParams:
    mode, param = parse_space(args.space)
    return EstimatorParams(
        k=args.k, alpha=args.alpha, epsilon=args.epsilon, seed=args.seed,
        space_mode=mode, space_param=param, normalize_output=args.normalize,
    )


def _emit(records, out_path):
    if out_path:
        write_csv(records, out_path)
    else:
        write_csv(records, sys.stdout)


def _handle_single(args) -> int:
    source = _source_from(args)
    stream, oracle = source.build()
    params = _params_from(args)
    extra = 1 if getattr(args, "count_pass", False) else 0
    baseline = None
    if args.algorithm not in ("pivot", "exact"):
        baseline = float(pivot_cost(oracle, params))
    record = run_algorithm(
        args.algorithm, stream, oracle, params,
        baseline=baseline, pairs=getattr(args, "pairs", None),
        reps=args.reps, timing=args.timing, extra_passes=extra,
    )
    if isinstance(record.estimate, str):
        _emit([record], args.out)
        return 1
    _emit([record], args.out)
    return 0


def _handle_gadget(args) -> int:
    if args.gadget_kind == "index":
        instance = index_gadget(_bits(args.x), args.b)
        name = "index"
    else:
        instance = disj_gadget(_bits(args.x), _bits(args.y))
        name = "disj"
    oracle = instance.oracle
    edges = [(u, v) for u in range(oracle.n) for v in range(u + 1, oracle.n)
             if oracle.sim(u, v)]
    if args.out:
        save_edgelist(args.out, ExplicitGraphOracle(oracle.n, edges))
    if args.points_out:
        with open(args.points_out, "w", encoding="utf-8") as fh:
            fh.write(format_points(instance.points))
    print(f"{name} n={oracle.n} expected_opt={instance.expected_opt}")
    if args.verify:
        cost, _ = opt_cost(instance.oracle)
        status = "ok" if cost == instance.expected_opt else "MISMATCH"
        print(f"brute_force_opt={cost} {status}")
        if cost != instance.expected_opt:
            return 1
    return 0


def _add_gadget_out(parser):
    parser.add_argument("--out", help="edge-list output path")
    parser.add_argument("--points-out", help="sparse-point text output path")
    parser.add_argument("--verify", action="store_true",
                        help="cross-check the closed form by brute force")


def _bits(text: str):
    if not text or any(ch not in "01" for ch in text):
        raise ValueError(f"bit string must be nonempty 0/1, got {text!r}")
    return tuple(int(ch) for ch in text)


def _handle_generate(args) -> int:
    source = _source_from(args)
    _, oracle = source.build()
    save_edgelist(args.out, oracle)
    print(f"wrote n={oracle.n} edges={oracle.edge_count()} to {args.out}")
    return 0


def _handle_experiment(args) -> int:
    source = _source_from(args)
    mode, param = parse_space(args.space)
    algorithms = tuple(a.strip() for a in args.algorithms.split(",") if a.strip())
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
    values = tuple(v.strip() for v in args.values.split(",") if v.strip())
    if not values:
        raise ValueError("--values must name at least one sweep point")
    cfg = ExperimentConfig(
        source=source,
        sweep=args.sweep,
        values=values,
        algorithms=algorithms,
        reps=args.seeds,
        k=args.k,
        alpha=args.alpha,
        epsilon=args.epsilon,
        space_mode=mode,
        space_param=param,
        normalize=args.normalize,
        master_seed=args.seed,
        estimator_reps=args.reps,
        pairs=args.pairs,
        workers=args.workers,
        timing=args.timing,
        extra_passes=1 if getattr(args, "count_pass", False) else 0,
    )
    records, tagged = run_experiment(cfg)
    _emit(records, args.out)
    if args.plot:
        if not args.out:
            raise ValueError("--plot needs --out to place the figure")
        png = args.out.rsplit(".", 1)[0] + ".png"
        render_figure(tagged, args.sweep, png)
        print(f"figure: {png}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
