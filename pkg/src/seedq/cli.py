"""Command-line interface.

Subcommands: sample, train, select, evaluate, stability, compare, evolve,
oracle, pipeline.  `seedq --help-formats` documents every file format and
CSV schema.  Node ids in CSVs are external ids, as in the edge-list files.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import backend
from .diffusion import DiffusionModel, estimate_spread, exact_spread
from .embedding import load_model, save_model
from .graph import clustering_distribution, degree_distribution, save_edge_list
from .pipeline import (
    ExperimentConfig,
    PipelineError,
    SnapshotSeries,
    load_graph_file,
    run_evolution,
    run_pipeline,
    _write_csv,
)
from .rng import substream
from .sampling import SampleSpec, ks_d_statistic, sample_subgraph
from .selection import celf_greedy, random_seeds, select_iterative, select_topk, stability_report
from .training import train

FORMATS_HELP = """\
File formats and CSV schemas
============================

edge list (graph files)
  whitespace-separated lines "u v" or "u v w"; '#' starts a comment line;
  u, v are arbitrary non-negative integer ids; w in [0,1] (default supplied
  at load). Self-loops and duplicate edges are rejected. Weights are written
  back with repr() so a save/load round trip is bit-exact.

model file (train / select / stability / compare)
  line 1: "qnet-model v1"; then "dim D", "rounds I"; then for each tensor
  "tensor NAME SHAPE..." followed by its rows in decimal (bit-exact repr).
  Tensors: w_nbr(D,D) w_edge(D,D) w_lift(D) w_seed(D) w_out(2D) w_global(D,D)
  w_node(D,D).

experiment config (train / evolve / pipeline)
  flat "key = value" lines, '#' comments. Keys and defaults:
{config_keys}

sampled subgraph (sample)
  edge-list format preceded by sidecar comment lines:
  "# ks_d_degree=<D-statistic vs parent degree CDF>" and optionally
  "# ks_d_clustering=<D-statistic vs parent clustering CDF>".

CSV schemas
  evaluate:  seeds,mean,stderr,runs,wall_time
  oracle:    seeds,exact_spread
  select:    node,q,rank
  compare:   method,k,spread_mean,spread_stderr,wall_time
  stability: k,insertion,delta_rank,observed_gap,delta_inf,gap_bound,
             gap_bound_sq
  evolve:    train_snapshot,k,spread,config_hash
  train log: episode,step,loss,epsilon,cum_reward,wall_time
  pipeline variants of these drop wall_time and append config_hash so that
  identical configs reproduce byte-identical files.
"""


def _formats_text() -> str:
    keys = "\n".join("    " + line for line in ExperimentConfig().to_text().splitlines())
    return FORMATS_HELP.format(config_keys=keys)


def _parse_seeds(g, text: str) -> list[int]:
    return [g.to_dense(int(tok)) for tok in text.replace(",", " ").split()]


def _emit(path: str | None, header, rows) -> None:
    rows = list(rows)
    if path:
        _write_csv(path, header, rows)
    print(",".join(header))
    for row in rows:
        print(",".join(
            "" if x is None else (repr(float(x)) if isinstance(x, float) else str(x)) for x in row
        ))


def _add_graph_args(p):
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--default-weight", type=float, default=0.5)


def _cmd_sample(args) -> int:
    g = load_graph_file(args.graph, args.directed, args.default_weight)
    spec = SampleSpec(
        method=args.method,
        fraction=args.fraction,
        flyback_p=args.flyback_p,
        snowball_limit=args.snowball_limit,
        rng_seed=args.seed,
        root=args.root,
    )
    sub = sample_subgraph(g, spec)
    headers = []
    d_deg = ks_d_statistic(degree_distribution(g), degree_distribution(sub))
    headers.append("ks_d_degree=%s" % repr(d_deg))
    if args.clustering:
        d_cc = ks_d_statistic(clustering_distribution(g), clustering_distribution(sub))
        headers.append("ks_d_clustering=%s" % repr(d_cc))
    save_edge_list(sub, args.out, header_lines=headers)
    print("sampled n=%d m=%d -> %s" % (sub.n, sub.num_edges, args.out))
    for h in headers:
        print(h)
    return 0


def _cmd_train(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.graphs_dir:
        import glob
        import os

        paths = sorted(glob.glob(os.path.join(args.graphs_dir, "*.txt")))
        if not paths:
            raise ValueError("no *.txt graphs under %s" % args.graphs_dir)
        graphs = [load_graph_file(p, cfg.directed, cfg.default_weight) for p in paths]
    else:
        parent = load_graph_file(cfg.graph, cfg.directed, cfg.default_weight)
        graphs = [
            sample_subgraph(
                parent,
                SampleSpec(
                    method=cfg.sample_method,
                    fraction=cfg.sample_fraction,
                    flyback_p=cfg.flyback_p,
                    snowball_limit=cfg.snowball_limit,
                    rng_seed=substream(cfg.rng_seed, "sample", "train", i),
                ),
            )
            for i in range(cfg.train_samples)
        ]
    t0 = time.perf_counter()
    result = train(graphs, cfg.train_config())
    wall = time.perf_counter() - t0
    save_model(args.model_out, result.params, cfg.embed_rounds)
    if args.log_out:
        _write_csv(
            args.log_out,
            ("episode", "step", "loss", "epsilon", "cum_reward", "wall_time"),
            ((r.episode, r.step, r.loss, r.epsilon, r.cum_reward, r.wall_time) for r in result.log),
        )
    print("trained %d episodes on %d graphs in %.1fs -> %s" % (cfg.episodes, len(graphs), wall, args.model_out))
    return 0


def _cmd_select(args) -> int:
    g = load_graph_file(args.graph, args.directed, args.default_weight)
    if args.method in ("topk", "iterative"):
        params, rounds = load_model(args.model)
        fn = select_topk if args.method == "topk" else select_iterative
        ss = fn(g, params, args.k, rounds)
    elif args.method == "celf":
        model = DiffusionModel(args.diffusion, args.lt_normalize)
        runs = None if args.celf_runs == 0 else args.celf_runs
        ss = celf_greedy(g, model, args.k, runs, args.seed)
    elif args.method == "random":
        ss = random_seeds(g, args.k, args.seed)
    else:
        raise ValueError("unknown method %r" % args.method)
    qs = ss.q_values or [None] * len(ss.nodes)
    _emit(
        args.out,
        ("node", "q", "rank"),
        ((g.ext_ids[v], q, rank) for rank, (v, q) in enumerate(zip(ss.nodes, qs), start=1)),
    )
    return 0


def _cmd_evaluate(args) -> int:
    g = load_graph_file(args.graph, args.directed, args.default_weight)
    model = DiffusionModel(args.diffusion, args.lt_normalize)
    seeds = _parse_seeds(g, args.seeds)
    t0 = time.perf_counter()
    est = estimate_spread(g, model, seeds, args.runs, args.seed)
    wall = time.perf_counter() - t0
    _emit(
        args.out,
        ("seeds", "mean", "stderr", "runs", "wall_time"),
        [(";".join(str(g.ext_ids[s]) for s in seeds), est.mean, est.stderr, est.runs, wall)],
    )
    return 0


def _cmd_oracle(args) -> int:
    g = load_graph_file(args.graph, args.directed, args.default_weight)
    model = DiffusionModel(args.diffusion, args.lt_normalize)
    seeds = _parse_seeds(g, args.seeds)
    val = exact_spread(g, model, seeds)
    _emit(args.out, ("seeds", "exact_spread"), [(";".join(str(g.ext_ids[s]) for s in seeds), val)])
    return 0


def _cmd_stability(args) -> int:
    g = load_graph_file(args.graph, args.directed, args.default_weight)
    params, rounds = load_model(args.model)
    model = DiffusionModel(args.diffusion, args.lt_normalize)
    rep = stability_report(
        g, params, args.k, rounds, model,
        pair_sample=None if args.pairs == 0 else args.pairs,
        runs=args.runs, rng_seed=args.seed,
    )
    rows = [(args.k, step, dr, gap, None, None, None) for step, dr, gap in rep.per_insertion]
    rows.append((args.k, "all", rep.delta_rank, rep.observed_gap, rep.delta_inf,
                 rep.gap_bound, rep.gap_bound_sq))
    _emit(
        args.out,
        ("k", "insertion", "delta_rank", "observed_gap", "delta_inf", "gap_bound", "gap_bound_sq"),
        rows,
    )
    return 0


def _cmd_compare(args) -> int:
    g = load_graph_file(args.graph, args.directed, args.default_weight)
    model = DiffusionModel(args.diffusion, args.lt_normalize)
    params = rounds = None
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    ks = [int(x) for x in args.k_list.split(",")]
    rows = []
    for k in ks:
        for method in methods:
            t0 = time.perf_counter()
            if method in ("topk", "iterative"):
                if params is None:
                    params, rounds = load_model(args.model)
                fn = select_topk if method == "topk" else select_iterative
                ss = fn(g, params, k, rounds)
            elif method == "celf":
                ss = celf_greedy(g, model, k, args.celf_runs, substream(args.seed, "celf", k))
            elif method == "random":
                ss = random_seeds(g, k, substream(args.seed, "random", k))
            else:
                raise ValueError("unknown method %r" % method)
            est = estimate_spread(g, model, ss.nodes, args.runs, substream(args.seed, "eval", method, k))
            rows.append((method, k, est.mean, est.stderr, time.perf_counter() - t0))
    _emit(args.out, ("method", "k", "spread_mean", "spread_stderr", "wall_time"), rows)
    return 0


def _cmd_evolve(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    snaps = []
    if args.snapshots_file:
        with open(args.snapshots_file, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                ts, path = line.split(None, 1)
                snaps.append((float(ts), path.strip()))
    else:
        for item in args.snapshots.split(","):
            ts, _, path = item.partition(":")
            snaps.append((float(ts), path.strip()))
    series = SnapshotSeries(tuple(snaps), assert_growth=args.assert_growth)
    rows = run_evolution(series, cfg, out_csv=args.out)
    print("train_snapshot,k,spread")
    for ts, k, s in rows:
        print("%s,%d,%s" % (ts, k, repr(s)))
    return 0


def _cmd_pipeline(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    out = run_pipeline(cfg, args.outdir)
    print("pipeline complete -> %s" % out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="seedq",
        description="Learning-based influence-maximization toolkit "
        "(backend: %s)" % backend.active_backend(),
    )
    ap.add_argument("--help-formats", action="store_true", help="describe file formats and CSV schemas")
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("sample", help="sample a subgraph and report sampler fidelity")
    _add_graph_args(p)
    p.add_argument("--method", default="bfs", choices=("bfs", "srw", "rwf", "isrw", "sb"))
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--flyback-p", type=float, default=0.15)
    p.add_argument("--snowball-limit", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--root", type=int, default=None)
    p.add_argument("--clustering", action="store_true", help="also report the clustering-CDF D-statistic")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("train", help="train a model per the experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--graphs-dir", help="directory of training edge lists (else sample per config)")
    p.add_argument("--model-out", required=True)
    p.add_argument("--log-out")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("select", help="pick k seeds with a trained model or a baseline")
    _add_graph_args(p)
    p.add_argument("--model", help="model file (topk/iterative)")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--method", default="topk", choices=("topk", "iterative", "celf", "random"))
    p.add_argument("--diffusion", default="ic", choices=("ic", "lt"))
    p.add_argument("--lt-normalize", action="store_true")
    p.add_argument("--celf-runs", type=int, default=1000, help="0 = exact spreads")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_select)

    p = sub.add_parser("evaluate", help="Monte-Carlo spread of a seed set")
    _add_graph_args(p)
    p.add_argument("--diffusion", default="ic", choices=("ic", "lt"))
    p.add_argument("--lt-normalize", action="store_true")
    p.add_argument("--seeds", required=True, help="comma-separated external node ids")
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("oracle", help="exact spread by live-edge enumeration (tiny graphs)")
    _add_graph_args(p)
    p.add_argument("--diffusion", default="ic", choices=("ic", "lt"))
    p.add_argument("--lt-normalize", action="store_true")
    p.add_argument("--seeds", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("stability", help="score-order stability of one-shot vs iterative selection")
    _add_graph_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--diffusion", default="ic", choices=("ic", "lt"))
    p.add_argument("--lt-normalize", action="store_true")
    p.add_argument("--pairs", type=int, default=10_000, help="0 = enumerate all pairs (n <= 2000)")
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_stability)

    p = sub.add_parser("compare", help="spread and wall time across methods and k")
    _add_graph_args(p)
    p.add_argument("--model")
    p.add_argument("--k-list", default="10,20,30,40,50")
    p.add_argument("--methods", default="topk,random")
    p.add_argument("--diffusion", default="ic", choices=("ic", "lt"))
    p.add_argument("--lt-normalize", action="store_true")
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--celf-runs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("evolve", help="train per snapshot, evaluate on the final snapshot")
    p.add_argument("--config", required=True)
    p.add_argument("--snapshots", help="t1:path1,t2:path2,...")
    p.add_argument("--snapshots-file", help="file of 'timestamp path' lines")
    p.add_argument("--assert-growth", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_evolve)

    p = sub.add_parser("pipeline", help="run sample -> train -> select -> evaluate -> stability")
    p.add_argument("--config", required=True)
    p.add_argument("--outdir")
    p.set_defaults(fn=_cmd_pipeline)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.help_formats:
        print(_formats_text())
        return 0
    if not getattr(args, "command", None):
        ap.print_help()
        return 2
    try:
        return args.fn(args)
    except PipelineError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
