"""End-to-end experiment pipeline: sample, train, select, evaluate, stability.

Configuration is flat key=value text ('#' comments).  All randomness flows
from one master seed through named substreams, every emitted CSV row carries
the config hash, and re-running the same config reproduces the artifact
directory byte for byte (stage wall times go to timings.txt, which is the
one deliberately volatile file).  On a stage failure the partial outputs are
moved into a quarantined/ subdirectory and the stage name is surfaced.
"""

from __future__ import annotations

import dataclasses
import hashlib
import os
import shutil
import time
from dataclasses import dataclass

from .diffusion import DiffusionModel, estimate_spread
from .embedding import save_model
from .graph import Graph, degree_distribution, load_edge_list, save_edge_list
from .rng import substream
from .sampling import SampleSpec, ks_d_statistic, sample_subgraph
from .selection import celf_greedy, random_seeds, select_iterative, select_topk, stability_report
from .training import TrainConfig, train


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__("stage %r failed: %s" % (stage, cause))
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class ExperimentConfig:
    graph: str = ""
    directed: bool = False
    default_weight: float = 0.5
    diffusion: str = "ic"
    lt_normalize: bool = True
    sample_method: str = "bfs"
    sample_fraction: float = 0.05
    flyback_p: float = 0.15
    snowball_limit: int = 100
    train_samples: int = 20
    heldout_samples: int = 0
    episodes: int = 300
    budget: int = 10
    batch_size: int = 64
    n_step: int = 5
    discount: float = 0.99
    lr: float = 0.001
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_anneal_steps: int = 10_000
    reward_runs: int = 100
    replay_capacity: int = 10_000
    embed_dim: int = 64
    embed_rounds: int = 4
    k_list: tuple = (10, 20, 30, 40, 50)
    methods: tuple = ("topk", "random")
    eval_runs: int = 10_000
    celf_runs: int = 1_000
    stability_k: int = 10
    stability_pairs: int = 10_000
    rng_seed: int = 0
    outdir: str = "out"

    # -- parsing ---------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        fields = {f.name: f for f in dataclasses.fields(cls)}
        values = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError("config line %d has no '=': %r" % (line_no, stripped))
            key, _, val = stripped.partition("=")
            key, val = key.strip(), val.strip()
            if key not in fields:
                raise ValueError("unknown config key %r (line %d)" % (key, line_no))
            values[key] = _coerce(fields[key].type, val, key)
        return cls(**values)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_text(f.read())

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                rendered = ",".join(str(x) for x in v)
            elif isinstance(v, bool):
                rendered = "true" if v else "false"
            elif isinstance(v, float):
                rendered = repr(v)
            else:
                rendered = str(v)
            lines.append("%s = %s" % (f.name, rendered))
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        """Hash of the experiment parameters; outdir only moves artifacts."""
        lines = [ln for ln in self.to_text().splitlines() if not ln.startswith("outdir ")]
        return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()

    def model(self) -> DiffusionModel:
        return DiffusionModel(self.diffusion, self.lt_normalize)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            episodes=self.episodes,
            budget=self.budget,
            batch_size=self.batch_size,
            n_step=self.n_step,
            discount=self.discount,
            lr=self.lr,
            eps_start=self.eps_start,
            eps_end=self.eps_end,
            eps_anneal_steps=self.eps_anneal_steps,
            reward_runs=self.reward_runs,
            replay_capacity=self.replay_capacity,
            embed_dim=self.embed_dim,
            embed_rounds=self.embed_rounds,
            diffusion=self.diffusion,
            lt_normalize=self.lt_normalize,
            rng_seed=substream(self.rng_seed, "train"),
        )


def load_graph_file(path: str, directed: bool, default_weight: float) -> Graph:
    with open(path, "r", encoding="utf-8") as f:
        return load_edge_list(f, directed, default_weight)


def _coerce(ftype, val: str, key: str):
    ftype = str(ftype)
    if "bool" in ftype:
        if val.lower() in ("true", "1", "yes"):
            return True
        if val.lower() in ("false", "0", "no"):
            return False
        raise ValueError("key %r wants a bool, got %r" % (key, val))
    if "tuple" in ftype:
        items = [x.strip() for x in val.split(",") if x.strip()]
        return tuple(int(x) if x.lstrip("-").isdigit() else x for x in items)
    if "int" in ftype:
        return int(val)
    if "float" in ftype:
        return float(val)
    return val


# -- CSV helpers (deterministic flavor: no timestamps) --------------------------


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_cell(x) for x in row) + "\n")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(float(x))  # plain float repr even for numpy scalars
    return str(x)


def _seed_csv_rows(g: Graph, seed_set, chash: str):
    qs = seed_set.q_values or [None] * len(seed_set.nodes)
    for rank, (node, q) in enumerate(zip(seed_set.nodes, qs), start=1):
        yield (g.ext_ids[node], q, rank, chash)


# -- the pipeline ----------------------------------------------------------------


def run_pipeline(cfg: ExperimentConfig, outdir: str | None = None) -> str:
    """Run every stage, writing artifacts under the output directory.

    Returns the artifact directory path.  Raises PipelineError with the
    failing stage's name after quarantining partial outputs.
    """
    out = outdir or cfg.outdir
    os.makedirs(out, exist_ok=True)
    chash = cfg.config_hash()
    master = cfg.rng_seed
    timings: list[tuple[str, float]] = []
    manifest_files: list[str] = []
    streams: list[tuple[str, int]] = []

    def emit(relpath: str):
        manifest_files.append(relpath)
        return os.path.join(out, relpath)

    def stream(*parts) -> int:
        key = substream(master, *parts)
        streams.append(("/".join(str(p) for p in parts), key))
        return key

    stage = "load"
    try:
        t0 = time.perf_counter()
        target = load_graph_file(cfg.graph, cfg.directed, cfg.default_weight)
        timings.append((stage, time.perf_counter() - t0))

        stage = "sample"
        t0 = time.perf_counter()
        os.makedirs(os.path.join(out, "samples"), exist_ok=True)
        parent_cdf = degree_distribution(target)
        train_graphs = []
        heldout_graphs = []
        for kind, count, graphs in (
            ("train", cfg.train_samples, train_graphs),
            ("heldout", cfg.heldout_samples, heldout_graphs),
        ):
            for i in range(count):
                spec = SampleSpec(
                    method=cfg.sample_method,
                    fraction=cfg.sample_fraction,
                    flyback_p=cfg.flyback_p,
                    snowball_limit=cfg.snowball_limit,
                    rng_seed=stream("sample", kind, i),
                )
                sub = sample_subgraph(target, spec)
                dstat = ks_d_statistic(parent_cdf, degree_distribution(sub))
                save_edge_list(
                    sub,
                    emit("samples/%s_%03d.txt" % (kind, i)),
                    header_lines=["ks_d_degree=%s" % repr(dstat), "config=%s" % chash],
                )
                graphs.append(sub)
        timings.append((stage, time.perf_counter() - t0))

        stage = "train"
        t0 = time.perf_counter()
        streams.append(("train", substream(master, "train")))
        result = train(train_graphs, cfg.train_config())
        save_model(emit("model.txt"), result.params, cfg.embed_rounds)
        _write_csv(
            emit("train_log.csv"),
            ("episode", "step", "loss", "epsilon", "cum_reward", "config_hash"),
            ((r.episode, r.step, r.loss, r.epsilon, r.cum_reward, chash) for r in result.log),
        )
        timings.append((stage, time.perf_counter() - t0))

        stage = "select"
        t0 = time.perf_counter()
        model = cfg.model()
        selections = {}
        for k in cfg.k_list:
            for method in cfg.methods:
                if method == "topk":
                    ss = select_topk(target, result.params, k, cfg.embed_rounds)
                elif method == "iterative":
                    ss = select_iterative(target, result.params, k, cfg.embed_rounds)
                elif method == "celf":
                    ss = celf_greedy(target, model, k, cfg.celf_runs, stream("celf", k))
                elif method == "random":
                    ss = random_seeds(target, k, stream("random", k))
                else:
                    raise ValueError("unknown method %r" % method)
                selections[(method, k)] = ss
                _write_csv(
                    emit("seeds_%s_k%d.csv" % (method, k)),
                    ("node", "q", "rank", "config_hash"),
                    _seed_csv_rows(target, ss, chash),
                )
        timings.append((stage, time.perf_counter() - t0))

        stage = "evaluate"
        t0 = time.perf_counter()
        rows = []
        for k in cfg.k_list:
            for method in cfg.methods:
                est = estimate_spread(
                    target, model, selections[(method, k)].nodes, cfg.eval_runs,
                    stream("eval", method, k),
                )
                rows.append((method, k, est.mean, est.stderr, chash))
        _write_csv(
            emit("compare.csv"),
            ("method", "k", "spread_mean", "spread_stderr", "config_hash"),
            rows,
        )
        timings.append((stage, time.perf_counter() - t0))

        stage = "stability"
        t0 = time.perf_counter()
        rep = stability_report(
            target, result.params, cfg.stability_k, cfg.embed_rounds, model,
            pair_sample=cfg.stability_pairs, runs=cfg.eval_runs,
            rng_seed=stream("stability"),
        )
        srows = [
            (cfg.stability_k, step, dr, gap, None, None, None, chash)
            for step, dr, gap in rep.per_insertion
        ]
        srows.append(
            (cfg.stability_k, "all", rep.delta_rank, rep.observed_gap, rep.delta_inf,
             rep.gap_bound, rep.gap_bound_sq, chash)
        )
        _write_csv(
            emit("stability.csv"),
            ("k", "insertion", "delta_rank", "observed_gap", "delta_inf",
             "gap_bound", "gap_bound_sq", "config_hash"),
            srows,
        )
        timings.append((stage, time.perf_counter() - t0))

        stage = "manifest"
        with open(os.path.join(out, "manifest.txt"), "w", encoding="utf-8") as f:
            f.write("config_hash %s\n" % chash)
            f.write("master_seed %d\n" % master)
            for label, key in sorted(set(streams)):
                f.write("stream %s %x\n" % (label, key))
            for rel in sorted(manifest_files):
                f.write("artifact %s\n" % rel)
            f.write("config_begin\n")
            f.write(cfg.to_text())
            f.write("config_end\n")
        with open(os.path.join(out, "timings.txt"), "w", encoding="utf-8") as f:
            for name, dt in timings:
                f.write("%s %.3f\n" % (name, dt))
    except Exception as exc:
        _quarantine(out)
        raise PipelineError(stage, exc) from exc
    return out


def _quarantine(out: str) -> None:
    qdir = os.path.join(out, "quarantined")
    os.makedirs(qdir, exist_ok=True)
    for name in os.listdir(out):
        if name == "quarantined":
            continue
        shutil.move(os.path.join(out, name), os.path.join(qdir, name))


# -- evolutionary snapshots -------------------------------------------------------


@dataclass(frozen=True)
class SnapshotSeries:
    """Ordered (timestamp, graph path) pairs of one evolving network."""

    snapshots: tuple  # ((timestamp, path), ...)
    assert_growth: bool = False  # verify later snapshots are supergraphs

    def __post_init__(self):
        ts = [t for t, _ in self.snapshots]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("snapshot timestamps must be strictly increasing")


def _check_supergraph(earlier: Graph, later: Graph) -> None:
    earlier_nodes = set(earlier.ext_ids)
    later_nodes = set(later.ext_ids)
    if not earlier_nodes <= later_nodes:
        raise ValueError("snapshot loses nodes despite monotone-growth flag")
    def edge_keys(g):
        out = set()
        for u, v in zip(g.edge_src, g.edge_dst):
            a, b = g.ext_ids[u], g.ext_ids[v]
            out.add((a, b) if g.directed else (min(a, b), max(a, b)))
        return out
    if not edge_keys(earlier) <= edge_keys(later):
        raise ValueError("snapshot loses edges despite monotone-growth flag")


def run_evolution(series: SnapshotSeries, cfg: ExperimentConfig, out_csv: str | None = None):
    """Train one model per snapshot, evaluate all on the final snapshot.

    Returns rows (snapshot_timestamp, k, spread_mean).  Substream labels do
    not depend on the snapshot index, so identical snapshots train identical
    models and produce identical rows.
    """
    if len(series.snapshots) < 2:
        raise ValueError("need at least 2 snapshots")
    graphs = [
        (ts, load_graph_file(path, cfg.directed, cfg.default_weight)) for ts, path in series.snapshots
    ]
    if series.assert_growth:
        for (_, a), (_, b) in zip(graphs, graphs[1:]):
            _check_supergraph(a, b)
    final = graphs[-1][1]
    for k in cfg.k_list:
        if k > final.n:
            raise ValueError("k=%d exceeds final snapshot n=%d" % (k, final.n))

    master = cfg.rng_seed
    model = cfg.model()
    rows = []
    for ts, g in graphs:
        if cfg.train_samples > 0:
            train_graphs = [
                sample_subgraph(
                    g,
                    SampleSpec(
                        method=cfg.sample_method,
                        fraction=cfg.sample_fraction,
                        flyback_p=cfg.flyback_p,
                        snowball_limit=cfg.snowball_limit,
                        rng_seed=substream(master, "evolve", "sample", i),
                    ),
                )
                for i in range(cfg.train_samples)
            ]
        else:
            train_graphs = [g]
        tc = dataclasses.replace(cfg.train_config(), rng_seed=substream(master, "evolve", "train"))
        result = train(train_graphs, tc)
        for k in cfg.k_list:
            seeds = select_topk(final, result.params, k, cfg.embed_rounds)
            est = estimate_spread(
                final, model, seeds.nodes, cfg.eval_runs, substream(master, "evolve", "eval", k)
            )
            rows.append((ts, k, est.mean))
    if out_csv:
        _write_csv(
            out_csv,
            ("train_snapshot", "k", "spread", "config_hash"),
            ((ts, k, s, cfg.config_hash()) for ts, k, s in rows),
        )
    return rows
