"""Training loops: D3QN with replay and target network, and the
reward-estimation baseline that regresses per-candidate rewards and acts
greedily on its predictions.

Seeding: one root seed is split into three independent streams (parameter
init, behavior/episodes, replay sampling) so runs are reproducible and the
streams stay decoupled.
"""

from dataclasses import dataclass, field

import numpy as np

from .env import EpisodeConfig, PlacementEnv, StateMatrix, Transition
from .errors import (
    ConfigError,
    NoActionAvailableError,
    TrainingDivergedError,
)
from .model import Instance, rms_gap
from .nets import (
    Optimizer,
    QNetworkParams,
    RewardNetParams,
    build_input,
    copy_params,
    init_q_params,
    init_reward_params,
    q_backward,
    q_forward,
    reward_backward,
    reward_forward,
)
from .selection import marginal_gain


@dataclass(frozen=True)
class TrainConfig:
    total_steps: int
    budget: int
    seed: int = 0
    epsilon: float = 0.1
    gamma: float = 1.0
    replay_capacity: int = 20_000
    batch_size: int = 64
    target_sync_period: int = 500
    warmup: int = 500
    lr: float = 1e-3
    optimizer: str = "adam"
    hidden: tuple = (64, 64)
    head_hidden: int = 32
    reward_hidden: tuple = (64, 32)

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must be in [0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma must be in [0, 1]")
        if self.batch_size > self.replay_capacity:
            raise ConfigError("batch_size exceeds replay capacity")
        if self.total_steps < 0:
            raise ConfigError("total_steps must be >= 0")
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")


class ReplayBuffer:
    """Fixed-capacity ring of records with uniform distinct-slot sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigError("capacity must be >= 1")
        self.capacity = capacity
        self._items = []
        self._next = 0

    def __len__(self):
        return len(self._items)

    def push(self, item):
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._next] = item
        self._next = (self._next + 1) % self.capacity

    def sample(self, rng, batch_size: int):
        if batch_size > len(self._items):
            raise ValueError("not enough stored items to sample")
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in idx]


def _masked_argmax(values, unmasked):
    """Index in ``unmasked`` with the largest value, lowest index on ties."""
    best = unmasked[0]
    best_v = values[best]
    for e in unmasked[1:]:
        if values[e] > best_v:
            best_v = values[e]
            best = e
    return int(best)


def select_action(params: QNetworkParams, state: StateMatrix,
                  epsilon: float, rng) -> int:
    """Masked epsilon-greedy over the Q-network's outputs."""
    unmasked = state.unmasked()
    if unmasked.size == 0:
        raise NoActionAvailableError("every position is already selected")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(unmasked[rng.integers(unmasked.size)])
    q = q_forward(params, build_input(state))
    return _masked_argmax(q, unmasked)


def rees_select_action(predict_fn, state: StateMatrix,
                       epsilon: float, rng) -> int:
    """Masked epsilon-greedy over predicted per-candidate rewards.

    ``predict_fn`` maps the (m, 2n) input rows to m scalar predictions;
    injecting the true marginal gains here reproduces oracle greedy.
    """
    unmasked = state.unmasked()
    if unmasked.size == 0:
        raise NoActionAvailableError("every position is already selected")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(unmasked[rng.integers(unmasked.size)])
    preds = np.asarray(predict_fn(build_input(state)), dtype=np.float64)
    return _masked_argmax(preds, unmasked)


def double_q_target(online: QNetworkParams, target: QNetworkParams,
                    transition: Transition, gamma: float) -> float:
    """TD target: online net picks the next action, target net scores it."""
    if transition.done:
        return float(transition.reward)
    rows = build_input(transition.next_state)
    unmasked = transition.next_state.unmasked()
    a_star = _masked_argmax(q_forward(online, rows), unmasked)
    q_t = q_forward(target, rows)[a_star]
    return float(transition.reward + gamma * q_t)


@dataclass(frozen=True)
class EpisodeLog:
    episode: int
    steps: int
    terminal_mg: float
    terminal_rmsg: float
    mean_loss: float
    epsilon: float


def _rng_streams(seed: int):
    root = np.random.SeedSequence(seed)
    init_ss, behave_ss, sample_ss = root.spawn(3)
    return (np.random.default_rng(init_ss),
            np.random.default_rng(behave_ss),
            np.random.default_rng(sample_ss))


def _check_instances(instances):
    if not instances:
        raise ConfigError("training set is empty")
    n = instances[0].n
    m = instances[0].m
    for inst in instances:
        if inst.n != n or inst.m != m:
            raise ConfigError("instances must share dimensions")
    return n, m


def _q_batch_update(params, target, opt, batch, gamma):
    """One MSE step on a replay batch; returns the batch loss."""
    B = len(batch)
    m = batch[0].state.m
    states = np.stack([build_input(tr.state) for tr in batch])
    actions = np.array([tr.action for tr in batch])
    rewards = np.array([tr.reward for tr in batch])
    dones = np.array([tr.done for tr in batch])

    nxt = np.stack([build_input(tr.next_state) for tr in batch])
    q_next_online = q_forward(params, nxt)
    q_next_target = q_forward(target, nxt)
    y = rewards.copy()
    for i, tr in enumerate(batch):
        if not dones[i]:
            a_star = _masked_argmax(q_next_online[i],
                                    tr.next_state.unmasked())
            y[i] += gamma * q_next_target[i, a_star]

    Q, cache = q_forward(params, states, return_cache=True)
    pred = Q[np.arange(B), actions]
    err = pred - y
    loss = float(np.mean(err ** 2))
    if not np.isfinite(loss):
        raise TrainingDivergedError("non-finite loss",
                                    last_params=copy_params(params))
    dQ = np.zeros((B, m))
    dQ[np.arange(B), actions] = 2.0 * err / B
    grads = q_backward(params, cache, dQ)
    opt.update(params, grads)
    return loss


def train_d3qn(instances, config: TrainConfig):
    """Returns (trained QNetworkParams, per-episode EpisodeLog list)."""
    n, m = _check_instances(instances)
    if config.budget > m:
        raise ConfigError("budget %d exceeds %d candidates"
                          % (config.budget, m))
    init_rng, behave_rng, sample_rng = _rng_streams(config.seed)
    params = init_q_params(n, init_rng, hidden=config.hidden,
                           head_hidden=config.head_hidden)
    target = copy_params(params)
    opt = Optimizer(kind=config.optimizer, lr=config.lr)
    buffer = ReplayBuffer(config.replay_capacity)
    logs = []
    min_fill = max(config.warmup, config.batch_size)

    step = 0
    episode = 0
    while step < config.total_steps:
        inst = instances[int(behave_rng.integers(len(instances)))]
        env = PlacementEnv(inst, EpisodeConfig.for_budget(config.budget))
        state = env.reset()
        losses = []
        ep_steps = 0
        while not env.done and step < config.total_steps:
            a = select_action(params, state, config.epsilon, behave_rng)
            tr = env.step(a)
            buffer.push(tr)
            state = tr.next_state
            step += 1
            ep_steps += 1
            if len(buffer) >= min_fill:
                losses.append(_q_batch_update(
                    params, target, opt,
                    buffer.sample(sample_rng, config.batch_size),
                    config.gamma))
            if step % config.target_sync_period == 0:
                target = copy_params(params)
        episode += 1
        sol = env.selection.solution
        logs.append(EpisodeLog(
            episode=episode, steps=ep_steps,
            terminal_mg=sol.d, terminal_rmsg=rms_gap(sol.delta),
            mean_loss=float(np.mean(losses)) if losses else float("nan"),
            epsilon=config.epsilon))
    return params, logs


def train_rees(instances, config: TrainConfig):
    """Reward-estimation baseline: regress observed rewards, act greedily.

    Returns (trained RewardNetParams, per-episode EpisodeLog list).
    """
    n, m = _check_instances(instances)
    if config.budget > m:
        raise ConfigError("budget %d exceeds %d candidates"
                          % (config.budget, m))
    init_rng, behave_rng, sample_rng = _rng_streams(config.seed)
    params = init_reward_params(n, init_rng, hidden=config.reward_hidden)
    opt = Optimizer(kind=config.optimizer, lr=config.lr)
    buffer = ReplayBuffer(config.replay_capacity)
    logs = []
    min_fill = max(config.warmup, config.batch_size)
    predict = lambda rows: reward_forward(params, rows)

    step = 0
    episode = 0
    while step < config.total_steps:
        inst = instances[int(behave_rng.integers(len(instances)))]
        env = PlacementEnv(inst, EpisodeConfig.for_budget(config.budget))
        state = env.reset()
        losses = []
        ep_steps = 0
        while not env.done and step < config.total_steps:
            a = rees_select_action(predict, state, config.epsilon,
                                   behave_rng)
            rows = build_input(state)
            tr = env.step(a)
            buffer.push((rows[a].copy(), tr.reward))
            state = tr.next_state
            step += 1
            ep_steps += 1
            if len(buffer) >= min_fill:
                batch = buffer.sample(sample_rng, config.batch_size)
                X = np.stack([row for row, _ in batch])
                yv = np.array([r for _, r in batch])
                pred, cache = reward_forward(params, X, return_cache=True)
                err = pred - yv
                loss = float(np.mean(err ** 2))
                if not np.isfinite(loss):
                    raise TrainingDivergedError(
                        "non-finite loss", last_params=copy_params(params))
                grads = reward_backward(params, cache,
                                        2.0 * err / len(batch))
                opt.update(params, grads)
                losses.append(loss)
        episode += 1
        sol = env.selection.solution
        logs.append(EpisodeLog(
            episode=episode, steps=ep_steps,
            terminal_mg=sol.d, terminal_rmsg=rms_gap(sol.delta),
            mean_loss=float(np.mean(losses)) if losses else float("nan"),
            epsilon=config.epsilon))
    return params, logs


@dataclass(frozen=True)
class EvalRow:
    instance_id: int
    selected: tuple
    mg: float
    rmsg: float
    count: int


@dataclass(frozen=True)
class EvalReport:
    rows: list
    mean_mg: float
    mean_rmsg: float
    mean_count: float


EVAL_MODES = ("d3qn", "rees", "greedy-oracle", "random")


def evaluate_policy(params, instances, config: EpisodeConfig, mode: str,
                    seed: int = 0) -> EvalReport:
    """Roll one greedy (epsilon=0) episode per instance and aggregate.

    ``mode`` picks the action rule: the Q-network, the reward estimator,
    exact LP marginal gains, or uniform-random (baseline; the only mode
    that consumes ``seed``).
    """
    if mode not in EVAL_MODES:
        raise ConfigError("unknown eval mode %r" % mode)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    rows = []
    for idx, inst in enumerate(instances):
        env = PlacementEnv(inst, config)
        state = env.reset()
        # a perfect initial fit means nothing to do: zero actuators
        while not env.done and env.gap_norm() > 1e-12:
            if mode == "d3qn":
                a = select_action(params, state, 0.0, None)
            elif mode == "rees":
                a = rees_select_action(
                    lambda r: reward_forward(params, r), state, 0.0, None)
            elif mode == "greedy-oracle":
                a = _masked_argmax(
                    np.array([
                        marginal_gain(inst, env.selection, e)
                        if e not in env.selection.selected else -np.inf
                        for e in range(inst.m)
                    ]),
                    state.unmasked())
            else:
                valid = env.valid_actions()
                a = valid[int(rng.integers(len(valid)))]
            tr = env.step(a)
            state = tr.next_state
        sol = env.selection.solution
        rows.append(EvalRow(
            instance_id=idx,
            selected=env.selection.selected,
            mg=sol.d,
            rmsg=rms_gap(sol.delta),
            count=len(env.selection.selected)))
    return EvalReport(
        rows=rows,
        mean_mg=float(np.mean([r.mg for r in rows])),
        mean_rmsg=float(np.mean([r.rmsg for r in rows])),
        mean_count=float(np.mean([r.count for r in rows])))
