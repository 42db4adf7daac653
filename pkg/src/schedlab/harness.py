"""Experiment orchestration: config files, seeded test datasets, evaluation
of any scheduler on a shared dataset, training runs, and comparison tables.

Config files are flat ``key = value`` documents; every key has a default
matching the standard experimental setup, and the resolved config is written
next to each run's outputs.
"""

import hashlib
import json
import os
from dataclasses import dataclass, fields as dataclass_fields

import numpy as np

from .ddpg import SETTINGS_PQ, DdpgAgent, DdpgConfig, TrainSchedule, run_training
from .rng import DOMAIN_TEST_EPISODES, STREAM_NN_INIT, mix_seed, stream
from .schedulers import SCHEDULER_NAMES, make_scheduler
from .sim import Env, EpisodeManifest, SimConfig, default_profiles

POLICY_NAMES = SCHEDULER_NAMES + ("ddpg", "ke-ddpg")


@dataclass
class ExperimentConfig:
    """Full experiment description with standard-setup defaults."""
    num_ues: int = 10
    apps: tuple = ("ftp", "uhd", "web", "gaming", "voip")
    num_prbs: int = 100
    tti_ms: float = 1.0
    episode_slots: int = 60000
    plr_window: int = 500
    burst_window: int = 500
    server_latency_ms: float = 22.0
    cqi_change_period: int = 40
    cqi_stay_prob: float = 0.8
    cqi_up_prob: float = 0.1
    cqi_down_prob: float = 0.1
    master_seed: int = 20260809
    scheduler: str = "rr"
    setting: int = 3               # architecture preset, see SETTINGS_PQ
    hidden_width: int = 256
    gamma: float = 0.99
    tau: float = 0.005
    replay_capacity: int = 50000
    minibatch: int = 64
    train_episodes: int = 200
    test_episodes: int = 100
    lr_bands: tuple = (1e-5, 1e-6, 1e-7, 1e-8)
    noise_bands: tuple = (0.02, 0.002, 0.0)

    def __post_init__(self):
        if self.setting not in SETTINGS_PQ:
            raise ValueError(f"setting must be one of {sorted(SETTINGS_PQ)}")
        if self.scheduler not in POLICY_NAMES:
            raise ValueError(f"scheduler must be one of {POLICY_NAMES}")
        if len(self.lr_bands) != 4 or len(self.noise_bands) != 3:
            raise ValueError("lr_bands needs 4 values, noise_bands needs 3")

    # -- file format -------------------------------------------------------

    @classmethod
    def from_file(cls, path, overrides=None):
        values = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
        return cls.from_dict(values, overrides)

    @classmethod
    def from_dict(cls, values, overrides=None):
        merged = dict(values)
        merged.update(overrides or {})
        kwargs = {}
        for field in dataclass_fields(cls):
            if field.name not in merged:
                continue
            raw = merged.pop(field.name)
            kwargs[field.name] = cls._coerce(field.name, raw)
        if merged:
            unknown = ", ".join(sorted(merged))
            raise ValueError(f"unknown config keys: {unknown}")
        return cls(**kwargs)

    @staticmethod
    def _coerce(name, raw):
        if isinstance(raw, (int, float, tuple, list)):
            return tuple(raw) if isinstance(raw, list) else raw
        default = getattr(ExperimentConfig, name)
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if name == "apps":
                return tuple(items)
            return tuple(float(x) for x in items)
        return raw

    def to_text(self):
        lines = ["# schedlab experiment config (resolved)"]
        for field in dataclass_fields(self):
            value = getattr(self, field.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            lines.append(f"{field.name} = {value}")
        return "\n".join(lines) + "\n"

    # -- derived pieces -------------------------------------------------------

    def sim_config(self):
        return SimConfig(num_ues=self.num_ues, num_apps=len(self.apps),
                         num_prbs=self.num_prbs, tti_ms=self.tti_ms,
                         episode_slots=self.episode_slots,
                         plr_window=self.plr_window,
                         burst_window=self.burst_window,
                         server_latency_ms=self.server_latency_ms,
                         cqi_change_period=self.cqi_change_period,
                         cqi_stay_prob=self.cqi_stay_prob,
                         cqi_up_prob=self.cqi_up_prob,
                         cqi_down_prob=self.cqi_down_prob,
                         master_seed=self.master_seed)

    def profiles(self):
        return default_profiles(self.apps, tti_ms=self.tti_ms)

    def ddpg_config(self):
        p, q = SETTINGS_PQ[self.setting]
        return DdpgConfig(num_ues=self.num_ues, num_apps=len(self.apps),
                          num_prbs=self.num_prbs, actor_hidden=p,
                          critic_state_hidden=q,
                          hidden_width=self.hidden_width, gamma=self.gamma,
                          tau=self.tau, replay_capacity=self.replay_capacity,
                          minibatch=self.minibatch)

    def schedule(self):
        return TrainSchedule.banded(self.train_episodes,
                                    lr_values=self.lr_bands,
                                    noise_values=self.noise_bands)

    def make_env(self):
        return Env(self.sim_config(), self.profiles())


def _atomic_write(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


# -- test dataset ---------------------------------------------------------

def gen_dataset(config: ExperimentConfig, n_episodes, path):
    """Write n manifests with seeds mixed deterministically from the master
    seed (seed_i = mix(master_seed, dataset domain, i))."""
    env = config.make_env()
    lines = [f"# schedlab-dataset v1 episodes={n_episodes} "
             f"master_seed={config.master_seed} ues={config.num_ues} "
             f"apps={','.join(config.apps)}"]
    for i in range(n_episodes):
        seed = mix_seed(config.master_seed, DOMAIN_TEST_EPISODES, i)
        manifest = env.init_episode(seed, episode_id=i)
        lines.append(manifest.to_line())
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def load_dataset(path):
    manifests = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            manifests.append(EpisodeManifest.from_line(line))
    if not manifests:
        raise ValueError(f"{path}: no episodes found")
    return manifests


# -- running episodes ---------------------------------------------------------

def run_episode(env, policy, manifest, metrics_sink=None):
    """Replay a manifest under a policy; returns the per-slot reward array."""
    env.init_from_manifest(manifest)
    slots = env.config.episode_slots
    rewards = np.empty(slots)
    for i in range(slots):
        ctx = env.scheduler_context()
        metrics = env.step(policy(ctx))
        rewards[i] = metrics.reward
        if metrics_sink is not None:
            metrics_sink.append(metrics)
    return rewards


def make_policy(name, agent=None):
    """Fresh per-episode policy callable (ctx -> allocation)."""
    if name in SCHEDULER_NAMES:
        scheduler = make_scheduler(name)
        return lambda ctx: scheduler.schedule(ctx)
    if name == "ddpg":
        return lambda ctx: agent.act(ctx.observation, mode="eval")
    if name == "ke-ddpg":
        return lambda ctx: agent.act(ctx.observation, mode="eval_ke")
    raise ValueError(f"unknown scheduler: {name!r}")


def run_eval(config: ExperimentConfig, manifests, scheduler_name,
             checkpoint=None, out_dir=".", dataset_path=None):
    """Evaluate one scheduler on every manifest; returns (rows, csv_path).

    Every scheduler sees identical exogenous randomness because episodes are
    rebuilt from the manifests with policy-independent random streams.
    """
    if scheduler_name not in POLICY_NAMES:
        raise ValueError(f"unknown scheduler: {scheduler_name!r}")
    agent = None
    if scheduler_name in ("ddpg", "ke-ddpg"):
        if not checkpoint:
            raise ValueError(f"scheduler {scheduler_name!r} requires a checkpoint")
        agent = DdpgAgent.load(checkpoint)
    os.makedirs(out_dir, exist_ok=True)
    env = config.make_env()
    rows = []
    for manifest in manifests:
        policy = make_policy(scheduler_name, agent)
        rewards = run_episode(env, policy, manifest)
        rows.append((manifest.episode_id, float(rewards.mean()),
                     float(rewards.sum())))
    csv_path = os.path.join(out_dir, f"eval_{scheduler_name}.csv")
    body = "episode,mean_reward,sum_reward\n" + "".join(
        f"{ep},{mean!r},{total!r}\n" for ep, mean, total in rows)
    _atomic_write(csv_path, body)
    write_run_metadata(out_dir, config, scheduler=scheduler_name,
                       checkpoint=checkpoint, dataset_path=dataset_path,
                       episodes=len(rows))
    return rows, csv_path


def write_run_metadata(out_dir, config, **extra):
    """Resolved config plus a metadata record for reproducibility."""
    _atomic_write(os.path.join(out_dir, "config_resolved.cfg"), config.to_text())
    meta = {
        "num_prbs": config.num_prbs,
        "baselines_demand_capped": True,
        "flow_granularity": "(ue, app)",
        "web_page_size_mbit": 24.0,
    }
    dataset_path = extra.pop("dataset_path", None)
    if dataset_path:
        meta["dataset"] = os.path.basename(str(dataset_path))
        meta["dataset_sha256"] = file_sha256(dataset_path)
    meta.update({k: v for k, v in extra.items() if v is not None})
    tmp = os.path.join(out_dir, "run_meta.json.tmp")
    with open(tmp, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, os.path.join(out_dir, "run_meta.json"))


# -- training ---------------------------------------------------------

def run_training_cli(config: ExperimentConfig, out_dir):
    """Train a DDPG scheduler per the config; returns the reward-log rows."""
    os.makedirs(out_dir, exist_ok=True)
    agent = DdpgAgent.create(config.ddpg_config(),
                             stream(config.master_seed, STREAM_NN_INIT))
    rows = run_training(config.make_env(), agent, config.schedule(),
                        config.master_seed, out_dir)
    write_run_metadata(out_dir, config, scheduler="ddpg-train",
                       episodes=config.train_episodes)
    return rows


# -- comparison ---------------------------------------------------------

def read_eval_csv(path):
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["episode", "mean_reward"]:
            raise ValueError(f"{path}: not an eval CSV")
        for line in fh:
            parts = line.strip().split(",")
            if parts and parts[0]:
                rows.append((int(parts[0]), float(parts[1])))
    return rows


def scheduler_name_from_csv(path):
    stem = os.path.splitext(os.path.basename(path))[0]
    return stem[len("eval_"):] if stem.startswith("eval_") else stem


def compare(csv_paths, reference=None):
    """Dataset-wide mean reward per scheduler plus ratios vs a reference.

    Returns rows of (name, mean_reward, ratio); the reference defaults to
    the best performer.
    """
    means = {}
    for path in csv_paths:
        rows = read_eval_csv(path)
        means[scheduler_name_from_csv(path)] = (
            sum(r for _, r in rows) / len(rows))
    if reference is None:
        reference = max(means, key=means.get)
    if reference not in means:
        raise ValueError(f"reference {reference!r} not among {sorted(means)}")
    ref_mean = means[reference]
    out = []
    for name in sorted(means, key=means.get, reverse=True):
        ratio = means[name] / ref_mean if ref_mean > 0 else float("nan")
        out.append((name, means[name], ratio))
    return out


def format_comparison(rows, reference):
    lines = [f"{'scheduler':<10} {'mean_reward':>12} {'vs ' + reference:>10}"]
    for name, mean, ratio in rows:
        lines.append(f"{name:<10} {mean:>12.6f} {ratio * 100:>9.2f}%")
    return "\n".join(lines)
