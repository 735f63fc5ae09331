"""n-step Q-learning with experience replay and epsilon-greedy exploration.

One episode grows a seed set to the budget on one training graph.  Each step
embeds the graph under the current seed set, scores every candidate, picks
one epsilon-greedily, and banks the Monte-Carlo marginal spread as the
reward.  Transitions span `n_step` selections; their targets bootstrap from
the current parameters (no separate target network) and gradients do not
flow through the target term.  Steps whose n-step window runs past the
budget are stored as terminal transitions with the truncated reward sum.

Everything is driven by named substreams of the config seed, so a run is
reproducible bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .diffusion import DiffusionModel, marginal_gain
from .embedding import QNetParams, _forward, _head_backward, _head_value, embed, init_params, q_values
from .graph import Graph
from .rng import Stream, substream


@dataclass(frozen=True)
class Transition:
    """n-step experience tuple: act in `state`, land in `next` n steps later."""

    graph_ref: int
    state_seeds: tuple
    action: int
    reward_sum: float
    next_seeds: tuple
    terminal: bool

    def __post_init__(self):
        if self.action in self.state_seeds:
            raise ValueError("action %d already in state seeds" % self.action)
        if not set(self.state_seeds) < set(self.next_seeds):
            raise ValueError("state seeds must be a proper subset of next seeds")


class ReplayMemory:
    """Bounded FIFO buffer sampled uniformly with replacement."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._buf: list[Transition] = []
        self._head = 0

    def push(self, t: Transition) -> None:
        if len(self._buf) < self.capacity:
            self._buf.append(t)
        else:
            self._buf[self._head] = t
            self._head = (self._head + 1) % self.capacity

    def sample(self, count: int, stream: Stream) -> list[Transition]:
        if not self._buf:
            raise ValueError("cannot sample from empty replay memory")
        return [self._buf[stream.below(len(self._buf))] for _ in range(count)]

    def __len__(self):
        return len(self._buf)

    def __iter__(self):
        return iter(self._buf)


@dataclass(frozen=True)
class TrainConfig:
    episodes: int
    budget: int  # seeds selected per episode
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
    grad_clip: float = 1.0  # global-norm cap on each SGD step; 0 disables
    diffusion: str = "ic"
    lt_normalize: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        # 0 is allowed (pure n-step return, no bootstrap), 1 is not
        if not (0.0 <= self.discount < 1.0):
            raise ValueError("discount must be in [0, 1)")
        if not (0.0 <= self.eps_end <= self.eps_start <= 1.0):
            raise ValueError("need 0 <= eps_end <= eps_start <= 1")
        if self.n_step < 1 or self.batch_size < 1 or self.budget < 1:
            raise ValueError("n_step, batch_size and budget must be >= 1")
        if self.episodes < 0 or self.eps_anneal_steps < 1 or self.reward_runs < 1:
            raise ValueError("bad episode/anneal/reward_runs setting")
        if self.lr < 0:
            raise ValueError("lr must be >= 0")

    def model(self) -> DiffusionModel:
        return DiffusionModel(self.diffusion, self.lt_normalize)


@dataclass
class TrainLogRow:
    episode: int
    step: int
    loss: float | None  # None when the step produced no parameter update
    epsilon: float
    cum_reward: float
    wall_time: float = 0.0  # seconds since training started (volatile)

    def deterministic_fields(self):
        return (self.episode, self.step, self.loss, self.epsilon, self.cum_reward)


@dataclass
class TrainResult:
    params: QNetParams
    config: TrainConfig
    log: list[TrainLogRow] = field(default_factory=list)


def epsilon_by_step(cfg: TrainConfig, t: int) -> float:
    """Linear anneal from eps_start to eps_end over eps_anneal_steps selections."""
    slope = (cfg.eps_start - cfg.eps_end) / cfg.eps_anneal_steps
    return max(cfg.eps_end, cfg.eps_start - t * slope)


def epsilon_greedy_action(q: np.ndarray, seeds, eps: float, stream: Stream) -> int:
    """Uniform non-seed with probability eps, else argmax over non-seeds.

    Ties break toward the smallest node id.  The exploration coin is drawn
    even when eps is 0 or 1, so a run's draw sequence does not depend on the
    anneal schedule shape.
    """
    mask = np.zeros(q.shape[0], dtype=bool)
    for s in seeds:
        mask[s] = True
    candidates = np.flatnonzero(~mask)
    if candidates.size == 0:
        raise ValueError("every node is already a seed")
    coin = stream.unit()
    if coin < eps:
        return int(candidates[stream.below(candidates.size)])
    return int(candidates[int(np.argmax(q[candidates]))])


def reward(g: Graph, model: DiffusionModel, seeds, v: int, runs: int, rng_seed: int) -> float:
    """Monte-Carlo increment of the influence range when v joins `seeds`."""
    return marginal_gain(g, model, seeds, v, runs, rng_seed)


def n_step_target(t: Transition, params: QNetParams, graphs, cfg: TrainConfig) -> float:
    """reward_sum plus the discounted best next-state score (constant w.r.t. grads)."""
    if t.terminal:
        return t.reward_sum
    g = graphs[t.graph_ref]
    emb = embed(g, t.next_seeds, params, cfg.embed_rounds)
    q = q_values(emb, params)
    mask = np.zeros(g.n, dtype=bool)
    for s in t.next_seeds:
        mask[s] = True
    candidates = np.flatnonzero(~mask)
    if candidates.size == 0:
        return t.reward_sum
    return t.reward_sum + cfg.discount * float(np.max(q[candidates]))


def loss(batch, params: QNetParams, graphs, cfg: TrainConfig) -> float:
    """Mean squared error between n-step targets and predicted scores."""
    targets = [n_step_target(t, params, graphs, cfg) for t in batch]
    return loss_given_targets(batch, targets, params, graphs, cfg)


def loss_given_targets(batch, targets, params: QNetParams, graphs, cfg: TrainConfig) -> float:
    """MSE against externally fixed targets (the function the gradient is of)."""
    if not batch:
        raise ValueError("empty batch")
    total = 0.0
    for t, target in zip(batch, targets):
        cache = _forward(graphs[t.graph_ref], t.state_seeds, params, cfg.embed_rounds, "out")
        total += (target - _head_value(cache, params, t.action)) ** 2
    return total / len(batch)


def grad_params(batch, params: QNetParams, graphs, cfg: TrainConfig):
    """Gradient of `loss` w.r.t. every tensor, targets held constant.

    Returns (grads, loss_value).
    """
    if not batch:
        raise ValueError("empty batch")
    targets = [n_step_target(t, params, graphs, cfg) for t in batch]
    grads = QNetParams.zeros(params.dim)
    total = 0.0
    for t, target in zip(batch, targets):
        cache = _forward(graphs[t.graph_ref], t.state_seeds, params, cfg.embed_rounds, "out")
        pred = _head_value(cache, params, t.action)
        residual = target - pred
        total += residual**2
        _head_backward(cache, params, t.action, -2.0 * residual / len(batch), grads)
    return grads, total / len(batch)


def _sgd_step(memory, params, graphs, cfg, replay_stream, where):
    # projected SGD: parameters live in [0,1] (they start positive and the
    # whole score construction assumes non-negative tensors).  The gradient
    # is additionally capped by global norm: the embedding rounds amplify
    # positive-initialized features enough that an uncapped first step
    # slams every tensor onto the 0 bound at once and kills the network.
    batch = memory.sample(cfg.batch_size, replay_stream)
    grads, loss_value = grad_params(batch, params, graphs, cfg)
    scale = cfg.lr
    if cfg.grad_clip > 0:
        gnorm = np.sqrt(sum(float(np.sum(g * g)) for _, g in grads.arrays()))
        if gnorm > cfg.grad_clip:
            scale *= cfg.grad_clip / gnorm
    for name, arr in params.arrays():
        np.clip(arr - scale * getattr(grads, name), 0.0, 1.0, out=arr)
    if not params.all_finite():
        raise RuntimeError("non-finite parameters after update at %s" % where)
    return loss_value


def train(training_graphs, cfg: TrainConfig) -> TrainResult:
    """Run the full training loop; deterministic given cfg.rng_seed.

    Episodes take training graphs round-robin.  A transition is pushed once
    its n-step window is complete (terminal tails at episode end), and every
    push is followed by one SGD step on a uniformly sampled batch.
    """
    graphs = list(training_graphs)
    if not graphs:
        raise ValueError("need at least one training graph")
    for g in graphs:
        if cfg.budget > g.n:
            raise ValueError("budget %d exceeds n=%d of a training graph" % (cfg.budget, g.n))

    master = cfg.rng_seed
    params = init_params(cfg.embed_dim, substream(master, "init"))
    policy = Stream(substream(master, "policy"))
    replay_stream = Stream(substream(master, "replay"))
    memory = ReplayMemory(cfg.replay_capacity)
    model = cfg.model()
    log: list[TrainLogRow] = []
    global_t = 0
    t_start = time.perf_counter()

    for ep in range(cfg.episodes):
        ref = ep % len(graphs)
        g = graphs[ref]
        seeds: list[int] = []
        history: list[tuple] = [()]
        rewards: list[float] = []
        cum = 0.0
        for i in range(cfg.budget):
            emb = embed(g, seeds, params, cfg.embed_rounds)
            q = q_values(emb, params)
            eps = epsilon_by_step(cfg, global_t)
            v = epsilon_greedy_action(q, seeds, eps, policy)
            r = reward(g, model, seeds, v, cfg.reward_runs, substream(master, "reward", ep, i))
            seeds.append(v)
            rewards.append(r)
            cum += r
            history.append(tuple(seeds))
            global_t += 1

            loss_value = None
            if i >= cfg.n_step:
                j = i - cfg.n_step
                memory.push(
                    Transition(
                        ref, history[j], history[j + 1][-1],
                        sum(rewards[j : j + cfg.n_step]), history[j + cfg.n_step], False,
                    )
                )
                loss_value = _sgd_step(
                    memory, params, graphs, cfg, replay_stream, "episode %d step %d" % (ep, i)
                )
            log.append(TrainLogRow(ep, i, loss_value, eps, cum, time.perf_counter() - t_start))

        # steps whose n-step window runs past the budget: truncated, terminal
        final = history[-1]
        for j in range(max(0, cfg.budget - cfg.n_step), cfg.budget):
            memory.push(
                Transition(ref, history[j], history[j + 1][-1], sum(rewards[j:]), final, True)
            )
            loss_value = _sgd_step(
                memory, params, graphs, cfg, replay_stream, "episode %d tail %d" % (ep, j)
            )
            log.append(TrainLogRow(ep, cfg.budget + (j - max(0, cfg.budget - cfg.n_step)),
                                   loss_value, epsilon_by_step(cfg, global_t), cum,
                                   time.perf_counter() - t_start))

    return TrainResult(params=params, config=cfg, log=log)
