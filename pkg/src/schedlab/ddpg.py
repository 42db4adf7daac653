"""Deterministic-policy-gradient scheduler: actor/critic pair with target
networks, replay buffer, integer action generation, and the
knowledge-embedding output adjustment.

The actor emits one non-negative score per (UE, application) flow; scores
are turned into an integer PRB allocation that always sums to the budget.
"""

import json
import os
import time
from dataclasses import dataclass, asdict

import numpy as np

from .nn import AdamState, adam_step, init_mlp, load_mlp, save_mlp
from .rng import (DOMAIN_TRAIN_EPISODES, STREAM_NN_INIT, STREAM_NOISE,
                  STREAM_REPLAY, mix_seed, stream)

# architecture settings: middle-layer counts (actor, critic state branch)
SETTINGS_PQ = {1: (2, 1), 2: (3, 2), 3: (4, 3), 4: (5, 4)}

OBS_FEATURES = 4


@dataclass(frozen=True)
class DdpgConfig:
    num_ues: int
    num_apps: int
    num_prbs: int
    actor_hidden: int = 4          # middle layers before the output layer
    critic_state_hidden: int = 3   # middle layers in the state branch
    hidden_width: int = 256
    gamma: float = 0.99
    tau: float = 0.005
    replay_capacity: int = 50000
    minibatch: int = 64

    def __post_init__(self):
        if self.actor_hidden < 1 or self.critic_state_hidden < 1:
            raise ValueError("need at least one middle layer per network")
        if not 0.0 <= self.gamma <= 1.0 or not 0.0 < self.tau <= 1.0:
            raise ValueError("gamma must be in [0, 1], tau in (0, 1]")

    @property
    def state_dim(self):
        return self.num_ues * self.num_apps * OBS_FEATURES

    @property
    def action_dim(self):
        return self.num_ues * self.num_apps


def build_actor(cfg, rng):
    """Flattened state in, one non-negative score per flow out (all ReLU)."""
    dims = [cfg.state_dim] + [cfg.hidden_width] * cfg.actor_hidden + [cfg.action_dim]
    return init_mlp(dims, ["relu"] * (len(dims) - 1), rng)


class CriticNet:
    """Two-branch state/action value network.

    The state branch and a single-layer action branch are concatenated and
    fed through two more ReLU layers down to the scalar value.
    """

    def __init__(self, state_branch, action_branch, head):
        self.state_branch = state_branch
        self.action_branch = action_branch
        self.head = head

    def params(self):
        return (self.state_branch.params() + self.action_branch.params()
                + self.head.params())

    def forward(self, state, action):
        hs = self.state_branch.forward(state)
        ha = self.action_branch.forward(action)
        return self.head.forward(np.concatenate([hs, ha], axis=-1))

    def backward(self, upstream):
        """Returns (param_grads, state_grad, action_grad)."""
        head_grads, dh = self.head.backward(upstream)
        split = self.state_branch.out_dim
        state_grads, dstate = self.state_branch.backward(dh[..., :split])
        action_grads, daction = self.action_branch.backward(dh[..., split:])
        return state_grads + action_grads + head_grads, dstate, daction

    def copy(self):
        return CriticNet(self.state_branch.copy(), self.action_branch.copy(),
                         self.head.copy())


def build_critic(cfg, rng):
    w = cfg.hidden_width
    state_branch = init_mlp([cfg.state_dim] + [w] * cfg.critic_state_hidden,
                            ["relu"] * cfg.critic_state_hidden, rng)
    action_branch = init_mlp([cfg.action_dim, w], ["relu"], rng)
    head = init_mlp([2 * w, w, 1], ["relu", "relu"], rng)
    return CriticNet(state_branch, action_branch, head)


def generate_action(output, num_prbs):
    """Turn raw network output into an integer allocation summing to the budget.

    Cells are visited in row-major order; each receives its rounded
    proportional share of the remaining budget, the final cell absorbs the
    remainder, and a zero-mass tail hands the whole remainder to the current
    cell.  Any real-valued output is accepted (magnitudes are used).
    """
    output = np.asarray(output, dtype=np.float64)
    flat = np.abs(output.ravel())
    action = np.zeros(flat.size, dtype=np.int64)
    total = float(flat.sum())
    remainder = int(num_prbs)
    for c in range(flat.size):
        if c == flat.size - 1:
            action[c] = remainder
        elif remainder == 0:
            action[c] = 0
        elif total <= 0.0:
            action[c] = remainder
            remainder = 0
        else:
            share = int(np.floor(remainder * flat[c] / total + 0.5))
            share = min(max(share, 0), remainder)  # guard float drift
            action[c] = share
            remainder -= share
            total -= flat[c]
    return action.reshape(output.shape)


def generate_action_batch(outputs, num_prbs):
    """Vectorized generate_action over rows; bit-identical to the scalar op.

    Rows whose remainder is exhausted (or whose mass hit zero) keep producing
    zeros, so the unconditional running-sum subtraction cannot change their
    outcome.
    """
    flat = np.abs(np.asarray(outputs, dtype=np.float64))
    m, n = flat.shape
    actions = np.zeros((m, n), dtype=np.int64)
    total = flat.sum(axis=1)
    remainder = np.full(m, int(num_prbs), dtype=np.int64)
    for c in range(n - 1):
        live = remainder > 0
        zero_mass = live & (total <= 0.0)
        actions[zero_mass, c] = remainder[zero_mass]
        remainder[zero_mass] = 0
        pos = live & ~zero_mass
        if pos.any():
            share = np.floor(remainder[pos] * flat[pos, c] / total[pos] + 0.5)
            share = np.clip(share.astype(np.int64), 0, remainder[pos])
            actions[pos, c] = share
            remainder[pos] -= share
        total = total - flat[:, c]
    actions[:, n - 1] = remainder
    return actions


def add_exploration_noise(output, std, rng):
    """Gaussian perturbation of the raw output, floored at zero."""
    if std <= 0.0:
        return np.array(output, copy=True)
    return np.maximum(output + rng.normal(0.0, std, size=np.shape(output)), 0.0)


def knowledge_embed(output, observation):
    """Zero the scores of flows that cannot use PRBs this slot.

    A flow is ineligible when it has no queued data or its UE reports the
    bottom channel quality; everything else is untouched.  Idempotent.
    """
    u_dim, k_dim = observation.shape[:2]
    adjusted = np.array(output, dtype=np.float64, copy=True).reshape(u_dim, k_dim)
    inactive = observation[:, :, 2] < 0.5
    no_channel = observation[:, :, 3] <= 0.0
    adjusted[inactive | no_channel] = 0.0
    return adjusted.reshape(np.shape(output))


def soft_update(target, online, tau):
    """target = tau * online + (1 - tau) * target, in place."""
    for pt, p in zip(target.params(), online.params()):
        pt *= 1.0 - tau
        pt += tau * p


class ReplayBuffer:
    """Fixed-capacity FIFO of (state, action, reward, next state) transitions."""

    def __init__(self, capacity):
        self.capacity = int(capacity)
        self.size = 0
        self._next = 0
        self._s = self._a = self._r = self._s2 = None

    def __len__(self):
        return self.size

    def push(self, state, action, reward, next_state):
        if self._s is None:
            self._s = np.empty((self.capacity, len(state)))
            self._a = np.empty((self.capacity, len(action)))
            self._r = np.empty(self.capacity)
            self._s2 = np.empty((self.capacity, len(next_state)))
        i = self._next
        self._s[i] = state
        self._a[i] = action
        self._r[i] = reward
        self._s2[i] = next_state
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng, m):
        """Uniform minibatch without replacement."""
        idx = rng.choice(self.size, size=m, replace=False)
        return self._s[idx], self._a[idx], self._r[idx], self._s2[idx]


def _bands(episodes, fractions, values):
    bands = []
    prev = 0
    for frac, value in zip(fractions, values):
        hi = int(round(frac * episodes))
        if frac == fractions[-1]:
            hi = episodes
        if hi > prev:
            bands.append((prev + 1, hi, value))
            prev = hi
    return tuple(bands)


@dataclass(frozen=True)
class TrainSchedule:
    """Episode-banded learning rate and exploration-noise scale."""
    episodes: int
    lr_bands: tuple
    noise_bands: tuple

    LR_FRACTIONS = (0.25, 0.5, 0.75, 1.0)
    NOISE_FRACTIONS = (0.25, 0.5, 1.0)

    @classmethod
    def banded(cls, episodes, lr_values=(1e-5, 1e-6, 1e-7, 1e-8),
               noise_values=(0.02, 0.002, 0.0)):
        """Quarter-length learning-rate bands and the matching noise decay,
        scaled proportionally to the episode count."""
        return cls(episodes=episodes,
                   lr_bands=_bands(episodes, cls.LR_FRACTIONS, lr_values),
                   noise_bands=_bands(episodes, cls.NOISE_FRACTIONS, noise_values))

    def __post_init__(self):
        for bands in (self.lr_bands, self.noise_bands):
            if bands[0][0] != 1 or bands[-1][1] != self.episodes:
                raise ValueError("bands must cover episodes 1..episodes")
            for (_, hi, _), (lo2, _, _) in zip(bands, bands[1:]):
                if lo2 != hi + 1:
                    raise ValueError("bands must be contiguous")

    def _lookup(self, bands, episode):
        for lo, hi, value in bands:
            if lo <= episode <= hi:
                return value
        raise ValueError(f"episode {episode} outside schedule")

    def lr(self, episode):
        return self._lookup(self.lr_bands, episode)

    def noise_std(self, episode):
        return self._lookup(self.noise_bands, episode)

    def band_ends(self):
        return tuple(hi for _, hi, _ in self.lr_bands)


class DdpgAgent:
    """Actor/critic pair with slowly tracking targets and Adam optimizers."""

    def __init__(self, cfg, actor, critic, actor_target, critic_target):
        self.cfg = cfg
        self.actor = actor
        self.critic = critic
        self.actor_target = actor_target
        self.critic_target = critic_target
        self.actor_opt = AdamState(actor.params())
        self.critic_opt = AdamState(critic.params())
        self.ke_fallbacks = 0  # knowledge embedding zeroed every score

    @classmethod
    def create(cls, cfg, rng):
        actor = build_actor(cfg, rng)
        critic = build_critic(cfg, rng)
        return cls(cfg, actor, critic, actor.copy(), critic.copy())

    # -- acting ---------------------------------------------------------------

    def actor_output(self, observation):
        return self.actor.forward(np.asarray(observation).ravel())

    def act(self, observation, mode="eval", noise_std=0.0, rng=None):
        """Observation -> feasible integer allocation.

        Modes: ``train`` adds exploration noise to the raw output,
        ``eval`` is the plain deterministic policy, ``eval_ke`` applies the
        knowledge-embedding adjustment first.
        """
        cfg = self.cfg
        out = self.actor_output(observation)
        if mode == "train":
            out = add_exploration_noise(out, noise_std, rng)
        elif mode == "eval_ke":
            out = knowledge_embed(out.reshape(cfg.num_ues, cfg.num_apps),
                                  observation).ravel()
            if not out.any():
                self.ke_fallbacks += 1
        elif mode != "eval":
            raise ValueError(f"unknown mode: {mode!r}")
        return generate_action(out.reshape(cfg.num_ues, cfg.num_apps),
                               cfg.num_prbs)

    # -- learning ---------------------------------------------------------------

    def critic_targets(self, rewards, next_states):
        """Bootstrap targets y = r + gamma * Q'(s', a'(s')).

        Target actions go through the same integer action generation as real
        ones and are normalized by the budget, so the target critic sees the
        action scale it was trained on.  Episodes are fixed-length, so every
        transition bootstraps.
        """
        cfg = self.cfg
        out = self.actor_target.forward(next_states)
        actions = generate_action_batch(out, cfg.num_prbs) / cfg.num_prbs
        q_next = self.critic_target.forward(next_states, actions)
        return rewards.reshape(-1, 1) + cfg.gamma * q_next

    def train_step(self, batch, lr):
        """One critic regression step, one actor ascent step, soft updates.

        Returns the critic loss before the update.
        """
        states, actions, rewards, next_states = batch
        m = states.shape[0]
        y = self.critic_targets(rewards, next_states)

        q = self.critic.forward(states, actions)
        err = q - y
        loss = float(np.mean(err * err))
        grads, _, _ = self.critic.backward(2.0 * err / m)
        adam_step(self.critic.params(), grads, self.critic_opt, lr, sign=-1)

        out = self.actor.forward(states)
        self.critic.forward(states, out)
        _, _, d_action = self.critic.backward(np.full((m, 1), 1.0 / m))
        actor_grads, _ = self.actor.backward(d_action)
        adam_step(self.actor.params(), actor_grads, self.actor_opt, lr, sign=+1)

        self.soft_update_targets()
        return loss

    def soft_update_targets(self):
        soft_update(self.actor_target, self.actor, self.cfg.tau)
        soft_update(self.critic_target, self.critic, self.cfg.tau)

    # -- persistence ---------------------------------------------------------------

    _NET_FILES = ("actor", "critic_state", "critic_action", "critic_head",
                  "actor_target", "critic_target_state", "critic_target_action",
                  "critic_target_head")

    def _nets(self):
        return (self.actor, self.critic.state_branch, self.critic.action_branch,
                self.critic.head, self.actor_target,
                self.critic_target.state_branch, self.critic_target.action_branch,
                self.critic_target.head)

    def save(self, dirpath, extra=None):
        os.makedirs(dirpath, exist_ok=True)
        for name, net in zip(self._NET_FILES, self._nets()):
            save_mlp(net, os.path.join(dirpath, f"{name}.ckpt"))
        meta = dict(asdict(self.cfg))
        meta["ke_fallbacks"] = self.ke_fallbacks
        if extra:
            meta.update(extra)
        tmp = os.path.join(dirpath, "meta.json.tmp")
        with open(tmp, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, os.path.join(dirpath, "meta.json"))

    @classmethod
    def load(cls, dirpath):
        with open(os.path.join(dirpath, "meta.json")) as fh:
            meta = json.load(fh)
        cfg = DdpgConfig(**{k: meta[k] for k in DdpgConfig.__dataclass_fields__})
        nets = [load_mlp(os.path.join(dirpath, f"{name}.ckpt"))
                for name in cls._NET_FILES]
        critic = CriticNet(nets[1], nets[2], nets[3])
        critic_target = CriticNet(nets[5], nets[6], nets[7])
        return cls(cfg, nets[0], critic, nets[4], critic_target)


def run_training(env, agent, schedule, master_seed, out_dir,
                 log_name="reward_log.csv"):
    """Train for the scheduled number of episodes; everything is seeded.

    Writes a per-episode reward log and a checkpoint directory at the end of
    every learning-rate band (the last one doubles as ``checkpoint_final``).
    Returns the log rows.
    """
    cfg = agent.cfg
    noise_rng = stream(master_seed, STREAM_NOISE)
    replay_rng = stream(master_seed, STREAM_REPLAY)
    buffer = ReplayBuffer(cfg.replay_capacity)
    band_ends = set(schedule.band_ends())
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for ep in range(1, schedule.episodes + 1):
        lr = schedule.lr(ep)
        std = schedule.noise_std(ep)
        env.init_episode(mix_seed(master_seed, DOMAIN_TRAIN_EPISODES, ep),
                         episode_id=ep)
        started = time.perf_counter()
        obs = env.observe()
        total = 0.0
        for _ in range(env.config.episode_slots):
            alloc = agent.act(obs, mode="train", noise_std=std, rng=noise_rng)
            metrics = env.step(alloc)
            next_obs = env.observe()
            buffer.push(obs.ravel(), alloc.ravel() / cfg.num_prbs,
                        metrics.reward, next_obs.ravel())
            if len(buffer) >= cfg.minibatch:
                agent.train_step(buffer.sample(replay_rng, cfg.minibatch), lr)
            obs = next_obs
            total += metrics.reward
        wall_ms = (time.perf_counter() - started) * 1000.0
        slots = env.config.episode_slots
        rows.append((ep, total / slots, total, wall_ms))
        if ep in band_ends:
            agent.save(os.path.join(out_dir, f"checkpoint_ep{ep:04d}"),
                       extra={"episode": ep, "lr": lr})
    agent.save(os.path.join(out_dir, "checkpoint_final"),
               extra={"episode": schedule.episodes})
    log_path = os.path.join(out_dir, log_name)
    tmp = log_path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write("episode,mean_reward,sum_reward,wall_ms\n")
        for ep, mean, total, wall in rows:
            fh.write(f"{ep},{mean!r},{total!r},{wall:.3f}\n")
    os.replace(tmp, log_path)
    return rows
