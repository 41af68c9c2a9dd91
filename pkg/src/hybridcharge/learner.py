"""Value-based learner over the five plan edits.

A small numpy Q-network (two ReLU hidden layers, Adam, Huber loss) with an
experience replay buffer, a periodically synchronized target network and
epsilon-greedy exploration. Masked actions are excluded both when acting and
when bootstrapping. A tabular variant keyed on hashed observations is
available for tiny scenarios.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .env import EnvState, PlanningEnv
from .plan import ChargingPlan


class LearnerDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class LearnerConfig:
    learning_rate: float = 0.01
    replay_capacity: int = 10_000
    batch_size: int = 128
    max_steps: int = 30_000
    gamma: float = 0.9
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_fraction: float = 0.8  # share of max_steps over which epsilon decays linearly
    hidden: tuple[int, int] = (64, 64)
    target_sync: int = 250
    train_every: int = 1
    q_limit: float = 1e6
    approximator: str = "mlp"  # mlp | tabular

    def __post_init__(self):
        if not (self.learning_rate > 0 and self.replay_capacity > 0 and self.batch_size > 0):
            raise ValueError("learning rate, replay capacity and batch size must be positive")
        if self.max_steps < 0 or not 0 <= self.gamma <= 1 or self.target_sync < 1 or self.train_every < 1:
            raise ValueError("invalid learner schedule")
        if not 0 <= self.eps_end <= self.eps_start <= 1:
            raise ValueError("need 0 <= eps_end <= eps_start <= 1")
        if self.approximator not in ("mlp", "tabular"):
            raise ValueError(f"unknown approximator {self.approximator!r}")

    def epsilon(self, step: int) -> float:
        span = max(self.eps_decay_fraction * self.max_steps, 1.0)
        frac = min(step / span, 1.0)
        return self.eps_start + frac * (self.eps_end - self.eps_start)


def symlog(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.log1p(np.abs(x))


class QNetwork:
    def __init__(self, n_in: int, hidden: tuple[int, ...], n_out: int, rng: np.random.Generator):
        sizes = [n_in, *hidden, n_out]
        self.params = []
        for a, b in zip(sizes[:-1], sizes[1:]):
            w = rng.normal(0.0, np.sqrt(2.0 / max(a, 1)), (a, b))
            self.params += [w, np.zeros(b)]
        self._m = [np.zeros_like(p) for p in self.params]
        self._v = [np.zeros_like(p) for p in self.params]
        self._t = 0

    def copy_from(self, other: "QNetwork") -> None:
        self.params = [p.copy() for p in other.params]

    def forward(self, x: np.ndarray, keep: bool = False):
        acts = [x]
        h = x
        n_layers = len(self.params) // 2
        for i in range(n_layers):
            h = h @ self.params[2 * i] + self.params[2 * i + 1]
            if i < n_layers - 1:
                h = np.maximum(h, 0.0)
            acts.append(h)
        return (h, acts) if keep else h

    def train_step(self, x: np.ndarray, actions: np.ndarray, targets: np.ndarray, lr: float) -> float:
        q, acts = self.forward(x, keep=True)
        rows = np.arange(len(actions))
        err = q[rows, actions] - targets
        loss = float(np.mean(np.where(np.abs(err) <= 1, 0.5 * err ** 2, np.abs(err) - 0.5)))
        grad_out = np.zeros_like(q)
        grad_out[rows, actions] = np.clip(err, -1.0, 1.0) / len(actions)
        grads = [None] * len(self.params)
        g = grad_out
        n_layers = len(self.params) // 2
        for i in reversed(range(n_layers)):
            grads[2 * i] = acts[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            if i > 0:
                g = (g @ self.params[2 * i].T) * (acts[i] > 0)
        self._t += 1
        b1, b2 = 0.9, 0.999
        for k, gr in enumerate(grads):
            self._m[k] = b1 * self._m[k] + (1 - b1) * gr
            self._v[k] = b2 * self._v[k] + (1 - b2) * gr ** 2
            m_hat = self._m[k] / (1 - b1 ** self._t)
            v_hat = self._v[k] / (1 - b2 ** self._t)
            self.params[k] = self.params[k] - lr * m_hat / (np.sqrt(v_hat) + 1e-8)
        return loss


class TabularQ:
    def __init__(self, n_out: int):
        self.n_out = n_out
        self.table: dict[bytes, np.ndarray] = {}

    @staticmethod
    def key(obs: np.ndarray) -> bytes:
        return hashlib.blake2b(np.ascontiguousarray(obs, dtype=np.float64).tobytes(), digest_size=16).digest()

    def values(self, obs: np.ndarray) -> np.ndarray:
        return self.table.get(self.key(obs), np.zeros(self.n_out))

    def update(self, obs: np.ndarray, action: int, target: float, lr: float) -> None:
        k = self.key(obs)
        q = self.table.setdefault(k, np.zeros(self.n_out))
        q[action] += lr * (target - q[action])


class Policy:
    """Greedy over learned action values among unmasked actions; uniform
    random among them when nothing has been learned yet."""

    def __init__(self, model, n_actions: int, trained: bool, seed: int = 0):
        self.model = model
        self.n_actions = n_actions
        self.trained = trained
        self._rng = np.random.default_rng(seed)

    def values(self, obs: np.ndarray) -> np.ndarray:
        if isinstance(self.model, TabularQ):
            return self.model.values(obs)
        return self.model.forward(symlog(obs)[None, :])[0]

    def act(self, obs: np.ndarray, mask: Optional[np.ndarray] = None) -> int:
        mask = np.ones(self.n_actions, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        allowed = np.flatnonzero(mask)
        if allowed.size == 0:
            return 0
        if not self.trained:
            return int(self._rng.choice(allowed))
        q = self.values(obs)
        return int(allowed[np.argmax(q[allowed])])


@dataclass
class LearnerResult:
    policy: Policy
    plan: ChargingPlan
    utility: float
    steps: int
    curve: list[tuple[int, float]] = field(default_factory=list)  # (step, mean episode reward)


class _Replay:
    def __init__(self, capacity: int, obs_size: int, n_actions: int):
        self.obs = np.zeros((capacity, obs_size))
        self.nxt = np.zeros((capacity, obs_size))
        self.action = np.zeros(capacity, dtype=int)
        self.reward = np.zeros(capacity)
        self.done = np.zeros(capacity, dtype=bool)
        self.mask = np.zeros((capacity, n_actions), dtype=bool)
        self.capacity, self.size, self.pos = capacity, 0, 0

    def add(self, o, a, r, n, d, m) -> None:
        i = self.pos
        self.obs[i], self.action[i], self.reward[i], self.nxt[i], self.done[i], self.mask[i] = o, a, r, n, d, m
        self.pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, n: int):
        idx = rng.integers(self.size, size=n)
        return self.obs[idx], self.action[idx], self.reward[idx], self.nxt[idx], self.done[idx], self.mask[idx]


def train_learner(env: PlanningEnv, cfg: LearnerConfig = LearnerConfig(), seed: int = 0,
                  curve_window: int = 10) -> LearnerResult:
    rng = np.random.default_rng(seed)
    n_actions = env.n_actions
    state = env.reset()
    obs = env.observe(state)
    best: EnvState = state
    if cfg.approximator == "tabular":
        model = TabularQ(n_actions)
        target = model
    else:
        model = QNetwork(obs.size, cfg.hidden, n_actions, rng)
        target = QNetwork(obs.size, cfg.hidden, n_actions, rng)
        target.copy_from(model)
    replay = None if cfg.approximator == "tabular" else _Replay(cfg.replay_capacity, obs.size, n_actions)

    curve: list[tuple[int, float]] = []
    returns: list[float] = []
    episode_return = 0.0
    mask = env.mask(state)
    for step in range(cfg.max_steps):
        if not mask.any():
            state = env.reset()
            obs, mask = env.observe(state), env.mask(state)
            if not mask.any():
                break
        allowed = np.flatnonzero(mask)
        if rng.random() < cfg.epsilon(step):
            action = int(rng.choice(allowed))
        else:
            q = model.values(obs) if isinstance(model, TabularQ) else model.forward(symlog(obs)[None, :])[0]
            action = int(allowed[np.argmax(q[allowed])])
        nxt, reward, done = env.step(state, action)
        nxt_obs = env.observe(nxt)
        nxt_mask = env.mask(nxt)
        episode_return += reward
        if nxt.utility > best.utility:
            best = nxt

        if isinstance(model, TabularQ):
            boot = 0.0 if done or not nxt_mask.any() else float(model.values(nxt_obs)[nxt_mask].max())
            model.update(obs, action, reward + cfg.gamma * boot, cfg.learning_rate)
            peak = float(np.abs(model.values(obs)).max())
        else:
            replay.add(symlog(obs), action, reward, symlog(nxt_obs), done, nxt_mask)
            peak = 0.0
            if replay.size >= min(cfg.batch_size, cfg.replay_capacity) and step % cfg.train_every == 0:
                o, a, r, n, d, m = replay.sample(rng, cfg.batch_size)
                qn = np.where(m, target.forward(n), -np.inf).max(axis=1)
                qn = np.where(d | ~np.isfinite(qn), 0.0, qn)
                model.train_step(o, a, r + cfg.gamma * qn, cfg.learning_rate)
                peak = float(np.abs(model.forward(o)).max())
            if (step + 1) % cfg.target_sync == 0:
                target.copy_from(model)
        if not np.isfinite(peak) or peak > cfg.q_limit:
            raise LearnerDiverged(f"action values reached {peak:.3g} at step {step} "
                                  f"(limit {cfg.q_limit:g}); lower the learning rate or gamma")

        if done:
            returns.append(episode_return)
            curve.append((step + 1, float(np.mean(returns[-curve_window:]))))
            episode_return = 0.0
            state = env.reset()
            obs, mask = env.observe(state), env.mask(state)
        else:
            state, obs, mask = nxt, nxt_obs, nxt_mask

    policy = Policy(model, n_actions, trained=cfg.max_steps > 0, seed=seed)
    return LearnerResult(policy, best.plan, best.utility, cfg.max_steps, curve)


def rollout_policy(env: PlanningEnv, policy: Policy, max_steps: Optional[int] = None) -> EnvState:
    """Run one greedy episode from the initial plan; returns the best state visited."""
    state = env.reset()
    best = state
    for _ in range(env.episode_length if max_steps is None else max_steps):
        mask = env.mask(state)
        if not mask.any():
            break
        state, _, done = env.step(state, policy.act(env.observe(state), mask))
        if state.utility > best.utility:
            best = state
        if done:
            break
    return best
