"""Clipped-surrogate policy optimisation with GAE."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, asdict, field
from typing import Callable, Optional

import numpy as np

from ..envs import EnvConfig, NavEnv, observation_scale
from ..errors import ConfigError, ContractViolation, TrainingError
from .nets import ActorCritic, Adam, build_actor_critic, clip_grad_norm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PpoConfig:
    horizon: int = 2048
    batch_size: int = 64
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip: float = 0.2
    learning_rate: float = 3e-5
    epochs: int = 10
    vf_coef: float = 0.5
    ent_coef: float = 0.0
    max_grad_norm: float = 0.5
    hidden: tuple = (64, 64)
    init_log_std: float = 0.0
    total_steps: int = 150_000
    eval_every: int = 10_000
    eval_episodes: int = 10

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not 0 < self.gamma <= 1:
            raise ConfigError("must be in (0, 1]", "ppo.gamma")
        if not 0 <= self.gae_lambda <= 1:
            raise ConfigError("must be in [0, 1]", "ppo.gae_lambda")
        if not self.clip > 0:
            raise ConfigError("must be > 0", "ppo.clip")
        if not self.learning_rate > 0:
            raise ConfigError("must be > 0", "ppo.learning_rate")
        for name in ("horizon", "batch_size", "epochs", "eval_every"):
            if getattr(self, name) < 1:
                raise ConfigError("must be >= 1", f"ppo.{name}")
        if self.eval_episodes < 0:
            raise ConfigError("must be >= 0", "ppo.eval_episodes")
        if not self.hidden or min(self.hidden) < 1:
            raise ConfigError("need at least one positive layer size", "ppo.hidden")
        if self.total_steps < self.horizon:
            raise ConfigError("must be >= ppo.horizon", "ppo.total_steps")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


@dataclass
class RolloutBuffer:
    obs: np.ndarray
    z: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    last_value: float = 0.0
    # finished episodes: dicts with return, length, reason
    episodes: list = field(default_factory=list)

    def __len__(self):
        return self.rewards.shape[0]

    @classmethod
    def empty(cls, horizon: int, obs_dim: int, act_dim: int) -> "RolloutBuffer":
        return cls(np.zeros((horizon, obs_dim)), np.zeros((horizon, act_dim)), np.zeros((horizon, act_dim)),
                   np.zeros(horizon), np.zeros(horizon), np.zeros(horizon), np.zeros(horizon, dtype=bool))


def gae(rewards, values, dones, bootstrap_value: float, gamma: float, lam: float):
    """Backward GAE recursion; a done at ``t`` cuts bootstrapping from ``t+1``."""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    n = rewards.shape[0]
    if values.shape[0] != n or dones.shape[0] != n:
        raise ContractViolation("rewards, values and dones must have equal length")
    adv = np.zeros(n)
    next_value = float(bootstrap_value)
    next_adv = 0.0
    for t in range(n - 1, -1, -1):
        live = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * next_value * live - values[t]
        next_adv = delta + gamma * lam * live * next_adv
        adv[t] = next_adv
        next_value = values[t]
    return adv, adv + values


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    centred = adv - adv.mean()
    std = centred.std()
    return centred / std if std > 1e-12 else centred


@dataclass(frozen=True)
class LossInfo:
    total: float
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float


def policy_loss_and_grads(ac: ActorCritic, mb: dict, cfg: PpoConfig):
    """Loss and analytic gradients (ordered like ``ac.params``) on one minibatch.

    ``mb`` holds ``obs, z, log_probs, advantages, returns``; advantages are
    used as given.
    """
    obs, z = mb["obs"], mb["z"]
    adv, ret, old = mb["advantages"], mb["returns"], mb["log_probs"]
    B = obs.shape[0]
    pol = ac.policy
    mean, acts_p = pol.mean_net.forward(obs, keep=True)
    std = np.exp(pol.log_std)
    logp = pol.log_prob(mean, z)
    log_ratio = logp - old
    ratio = np.exp(log_ratio)
    s1 = ratio * adv
    s2 = np.clip(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv
    unclipped = s1 <= s2
    policy_loss = -float(np.mean(np.minimum(s1, s2)))
    entropy = pol.entropy()

    values, acts_v = ac.value_net.forward(obs, keep=True)
    err = values[:, 0] - ret
    value_loss = float(np.mean(err * err))
    total = policy_loss + cfg.vf_coef * value_loss - cfg.ent_coef * entropy
    if not math.isfinite(total):
        raise TrainingError("non-finite loss", {
            "policy_loss": policy_loss, "value_loss": value_loss, "entropy": entropy,
            "max_abs_log_ratio": float(np.max(np.abs(log_ratio))) if B else 0.0,
            "log_std": pol.log_std.tolist()})

    d_logp = np.where(unclipped, -adv * ratio / B, 0.0)
    e = (z - mean) / std
    g_mean = d_logp[:, None] * e / std
    g_log_std = (d_logp[:, None] * (e * e - 1.0)).sum(axis=0) - cfg.ent_coef
    g_value = (cfg.vf_coef * 2.0 / B) * err[:, None]
    grads = pol.mean_net.backward(acts_p, g_mean) + [g_log_std] + ac.value_net.backward(acts_v, g_value)

    info = LossInfo(
        total=total, policy_loss=policy_loss, value_loss=value_loss, entropy=entropy,
        approx_kl=float(np.mean((ratio - 1.0) - log_ratio)),
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > cfg.clip)),
    )
    return info, grads


def collect_rollout(env: NavEnv, ac: ActorCritic, horizon: int, rng: np.random.Generator,
                    obs: Optional[np.ndarray] = None, gamma: float = 0.99):
    """Run the stochastic policy for exactly ``horizon`` steps, resetting as needed.

    A timeout is stored as a terminal step whose reward already includes
    ``gamma * V(final observation)``, so truncation is not mistaken for a
    true terminal. Returns ``(buffer, observation to continue from)``.
    """
    buf = RolloutBuffer.empty(horizon, env.obs_dim, env.act_dim)
    if obs is None:
        obs = env.reset(rng)
    ep_ret, ep_len = 0.0, 0
    for t in range(horizon):
        action, z, lp = ac.policy.act(obs, rng)
        v = float(ac.value(obs))
        res = env.step(action)
        r = res.reward
        ep_ret += r
        ep_len += 1
        if res.termination_reason == "timeout":
            r += gamma * float(ac.value(res.observation))
        buf.obs[t] = obs
        buf.z[t] = z
        buf.actions[t] = action
        buf.log_probs[t] = lp
        buf.rewards[t] = r
        buf.values[t] = v
        buf.dones[t] = res.terminated
        if res.terminated:
            buf.episodes.append({"return": ep_ret, "length": ep_len, "reason": res.termination_reason})
            ep_ret, ep_len = 0.0, 0
            obs = env.reset(rng)
        else:
            obs = res.observation
    buf.last_value = float(ac.value(obs))
    # a partially run episode keeps going in the next rollout; its running
    # return is dropped from the episode statistics
    return buf, obs


def _finite(ac: ActorCritic) -> bool:
    return all(np.all(np.isfinite(p)) for p in ac.params)


def update(ac: ActorCritic, opt: Adam, buf: RolloutBuffer, cfg: PpoConfig, rng: np.random.Generator) -> LossInfo:
    adv, ret = gae(buf.rewards, buf.values, buf.dones, buf.last_value, cfg.gamma, cfg.gae_lambda)
    n = len(buf)
    infos = []
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            mb = {"obs": buf.obs[idx], "z": buf.z[idx], "log_probs": buf.log_probs[idx],
                  "advantages": normalize_advantages(adv[idx]), "returns": ret[idx]}
            info, grads = policy_loss_and_grads(ac, mb, cfg)
            clip_grad_norm(grads, cfg.max_grad_norm)
            opt.step(grads)
            infos.append(info)
    return LossInfo(*(float(np.mean([getattr(i, f) for i in infos])) for f in LossInfo.__dataclass_fields__))


STATS_FIELDS = ("steps", "updates", "train_episodes", "train_mean_return", "train_success_rate",
                "train_collision_rate", "eval_mean_return",
                "success_rate", "collision_rate", "timeout_rate", "policy_loss", "value_loss",
                "entropy", "approx_kl", "clip_fraction")


def _rate(episodes: list, reason: str) -> float:
    return sum(e["reason"] == reason for e in episodes) / len(episodes) if episodes else float("nan")


def init_actor_critic(env_cfg: EnvConfig, cfg: PpoConfig, rng: np.random.Generator) -> ActorCritic:
    sysspec = env_cfg.system
    return build_actor_critic(env_cfg.obs_dim, env_cfg.act_dim, cfg.hidden, sysspec.lo, sysspec.hi, rng,
                              cfg.init_log_std, observation_scale(env_cfg))


def train(env_cfg: EnvConfig, cfg: PpoConfig, seed: int,
          on_stats: Optional[Callable[[dict], None]] = None):
    """Alternate rollouts and updates for ``cfg.total_steps // cfg.horizon`` rounds.

    Every ``cfg.eval_every`` steps (and after the last update) the
    deterministic policy is evaluated on ``cfg.eval_episodes`` seeded
    episodes. Returns ``(actor_critic, stats_rows)``. Non-finite parameters
    raise ``TrainingError`` carrying the last good parameters.
    """
    from ..evaluation import evaluate  # evaluation imports rl.nets

    init_ss, env_ss, upd_ss = np.random.SeedSequence(seed).spawn(3)
    ac = init_actor_critic(env_cfg, cfg, np.random.default_rng(init_ss))
    env_rng = np.random.default_rng(env_ss)
    upd_rng = np.random.default_rng(upd_ss)
    env = NavEnv(env_cfg)
    opt = Adam(ac.params, cfg.learning_rate)

    n_updates = cfg.total_steps // cfg.horizon
    rows = []
    obs = None
    recent = []
    last_good = [p.copy() for p in ac.params]
    next_eval = cfg.eval_every
    for u in range(n_updates):
        buf, obs = collect_rollout(env, ac, cfg.horizon, env_rng, obs, cfg.gamma)
        recent.extend(buf.episodes)
        info = update(ac, opt, buf, cfg, upd_rng)
        if not _finite(ac):
            raise TrainingError("non-finite parameters after update", {
                "update": u, "last_good_params": last_good, "loss": asdict(info)})
        last_good = [p.copy() for p in ac.params]
        steps = (u + 1) * cfg.horizon
        if steps >= next_eval or u == n_updates - 1:
            while next_eval <= steps:
                next_eval += cfg.eval_every
            if cfg.eval_episodes:
                rep = evaluate(ac.policy, env_cfg, cfg.eval_episodes, seed=int(seed) + 1_000_003)
                ev = (rep.mean_return, rep.success_rate, rep.collision_rate, rep.timeout_rate)
            else:
                ev = (float("nan"),) * 4
            row = dict(zip(STATS_FIELDS, (
                steps, u + 1, len(recent),
                float(np.mean([e["return"] for e in recent])) if recent else float("nan"),
                _rate(recent, "goal_reached"), _rate(recent, "collision"),
                *ev, info.policy_loss, info.value_loss, info.entropy, info.approx_kl, info.clip_fraction)))
            rows.append(row)
            recent = []
            log.info("steps=%d return=%.3f success=%.2f collision=%.2f", steps,
                     row["train_mean_return"], row["success_rate"], row["collision_rate"])
            if on_stats is not None:
                on_stats(row)
    return ac, rows
