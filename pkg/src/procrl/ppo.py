"""Proximal policy optimization for the continuous setpoint action.

Gaussian policy over a pre-squash variable u with a state-independent
learnable log-std; the environment action is the tanh-squashed u mapped
into the setpoint bounds.  Log-probabilities are taken in u-space: the
tanh Jacobian cancels in the new/old probability ratio for identical
stored actions, so clipping behaves exactly as with an unsquashed
Gaussian.  Updates maximize the clipped surrogate with a value-MSE term,
per-batch advantage normalization, global gradient clipping and Adam.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .env import EpisodeSpec
from .nets import Adam, Mlp, RunningNorm, clip_grad_norm

LOG_2PI = math.log(2.0 * math.pi)

# Exploration bounds: below exp(-4) the Gaussian is so narrow that ratio
# estimates blow up on the next batch and trip the divergence guard.
LOG_STD_MIN = -4.0
LOG_STD_MAX = 2.0


class TrainingDivergedError(RuntimeError):
    """Probability ratios exploded; training is aborted with diagnostics."""


class CheckpointError(ValueError):
    """Checkpoint file malformed or incompatible with the configuration."""


@dataclass(frozen=True)
class PpoConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    epochs_per_update: int = 10
    minibatch_size: int = 64
    episodes_per_update: int = 8
    learning_rate: float = 1e-3
    value_coef: float = 0.5
    entropy_coef: float = 0.0
    max_grad_norm: float = 0.5
    hidden_sizes: tuple = (64, 64)
    initial_log_std: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if not 0.0 < self.gae_lambda <= 1.0:
            raise ValueError("gae_lambda must be in (0, 1]")
        if not self.clip_epsilon > 0:
            raise ValueError("clip_epsilon must be > 0")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "gamma", "gae_lambda", "clip_epsilon", "epochs_per_update",
            "minibatch_size", "episodes_per_update", "learning_rate",
            "value_coef", "entropy_coef", "max_grad_norm", "initial_log_std")}
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PpoConfig":
        d = dict(d)
        d["hidden_sizes"] = tuple(d.get("hidden_sizes", (64, 64)))
        return cls(**d)


@dataclass
class Trajectory:
    """One 30-step episode as collected: policy inputs, actions, rewards."""

    obs: np.ndarray        # (T, obs_dim) raw sensor values
    obs_norm: np.ndarray   # (T, obs_dim) inputs actually fed to the policy
    actions_u: np.ndarray  # (T,) pre-squash actions
    actions: np.ndarray    # (T,) setpoints applied to the environment
    log_probs: np.ndarray  # (T,) gaussian log-density of u at sampling time
    rewards: np.ndarray    # (T,)
    values: np.ndarray     # (T,)
    dones: np.ndarray      # (T,) bool

    def __post_init__(self):
        n = len(self.rewards)
        for name in ("obs", "obs_norm", "actions_u", "actions",
                     "log_probs", "values", "dones"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"trajectory field {name} misaligned")

    @property
    def cumulative_reward(self) -> float:
        return float(np.sum(self.rewards))


def gaussian_log_prob(u, mean, std):
    z = (u - mean) / std
    return -0.5 * z * z - np.log(std) - 0.5 * LOG_2PI


def gae(rewards, values, dones, last_value: float, gamma: float, lam: float):
    """Generalized advantage estimation.

    delta_t = r_t + gamma * v_{t+1} * (1 - done_t) - v_t
    A_t     = delta_t + gamma * lam * (1 - done_t) * A_{t+1}

    Returns (advantages, returns) with returns = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    n = len(rewards)
    if len(values) != n or len(dones) != n:
        raise ValueError("rewards, values and dones must have equal length")
    advantages = np.zeros(n)
    running = 0.0
    for t in reversed(range(n)):
        next_value = values[t + 1] if t + 1 < n else last_value
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        running = delta + gamma * lam * nonterminal * running
        advantages[t] = running
    return advantages, advantages + values


def squash_to_bounds(u, low: float, high: float):
    return low + (np.tanh(u) + 1.0) * 0.5 * (high - low)


class PpoAgent:
    """Actor/critic pair plus everything needed to reproduce a run."""

    def __init__(self, cfg: PpoConfig = None, spec: EpisodeSpec = None,
                 seed: int = 0, obs_dim: int = 7):
        self.cfg = cfg or PpoConfig()
        self.spec = spec or EpisodeSpec()
        self.obs_dim = obs_dim
        init_rng = np.random.default_rng(np.random.SeedSequence(seed))
        sizes = (obs_dim, *self.cfg.hidden_sizes, 1)
        # Final policy layer near zero: the initial greedy setpoint sits at
        # the midpoint of the bounds.
        self.actor = Mlp(sizes, init_rng, out_scale=0.01)
        self.critic = Mlp(sizes, init_rng, out_scale=1.0)
        self.log_std = np.array([self.cfg.initial_log_std])
        self.norm = RunningNorm(obs_dim)
        self._params = self.actor.params + [self.log_std] + self.critic.params
        self.adam = Adam(self._params, lr=self.cfg.learning_rate)
        # Distinct stream for minibatch shuffles so changing the rollout
        # count never perturbs the update-side randomness.
        self._shuffle_rng = np.random.default_rng(np.random.SeedSequence([seed, 81]))
        self.updates_done = 0

    # ---------------------------------------------------------------- policy

    def policy_forward(self, obs_norm: np.ndarray):
        """(mean, std, value) for a batch of normalized observations."""
        obs_norm = np.atleast_2d(obs_norm)
        if not np.all(np.isfinite(obs_norm)):
            raise TrainingDivergedError("non-finite observation fed to policy")
        mean, _ = self.actor.forward(obs_norm)
        value, _ = self.critic.forward(obs_norm)
        std = math.exp(float(self.log_std[0]))
        out = mean[:, 0], std, value[:, 0]
        if not (np.all(np.isfinite(out[0])) and np.all(np.isfinite(out[2]))):
            raise TrainingDivergedError("non-finite network output")
        return out

    def sample_action(self, mean: float, std: float, rng: np.random.Generator):
        """Draw u ~ N(mean, std); returns (u, env action, log_prob of u)."""
        u = float(rng.normal(mean, std))
        action = float(squash_to_bounds(u, self.spec.sv_low, self.spec.sv_high))
        log_prob = float(gaussian_log_prob(u, mean, std))
        return u, action, log_prob

    def greedy_action(self, obs_raw) -> float:
        """Mean action without exploration; normalizer statistics frozen."""
        obs_n = self.norm.normalize(np.asarray(obs_raw, dtype=np.float64))
        mean, _, _ = self.policy_forward(obs_n)
        return float(squash_to_bounds(float(mean[0]),
                                      self.spec.sv_low, self.spec.sv_high))

    # --------------------------------------------------------------- rollout

    def collect_rollouts(self, env_factory, n_episodes: int, rng) -> list:
        """Run full episodes with the current stochastic policy.

        env_factory(rng) must return a (env, scenario) pair; it may sample
        the scenario from rng.  Deterministic for a fixed (params, rng
        state): rerunning with the same seed reproduces the batch exactly.
        """
        if n_episodes < 1:
            raise ValueError("n_episodes must be >= 1")
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        trajectories = []
        for _ in range(n_episodes):
            env, scenario = env_factory(rng)
            obs = env.reset(scenario)
            rows = {k: [] for k in ("obs", "obs_norm", "u", "a", "logp",
                                    "r", "v", "done")}
            done = False
            while not done:
                self.norm.update(obs[None, :])
                obs_n = self.norm.normalize(obs)
                mean, std, value = self.policy_forward(obs_n)
                u, action, logp = self.sample_action(float(mean[0]), std, rng)
                next_obs, r, done, _ = env.step(action)
                rows["obs"].append(obs)
                rows["obs_norm"].append(obs_n)
                rows["u"].append(u)
                rows["a"].append(action)
                rows["logp"].append(logp)
                rows["r"].append(r)
                rows["v"].append(float(value[0]))
                rows["done"].append(done)
                obs = next_obs
            trajectories.append(Trajectory(
                obs=np.array(rows["obs"]),
                obs_norm=np.array(rows["obs_norm"]),
                actions_u=np.array(rows["u"]),
                actions=np.array(rows["a"]),
                log_probs=np.array(rows["logp"]),
                rewards=np.array(rows["r"]),
                values=np.array(rows["v"]),
                dones=np.array(rows["done"], dtype=bool),
            ))
        return trajectories

    # ---------------------------------------------------------------- update

    def compute_advantages(self, trajectories):
        advs, rets = [], []
        for tr in trajectories:
            a, r = gae(tr.rewards, tr.values, tr.dones, last_value=0.0,
                       gamma=self.cfg.gamma, lam=self.cfg.gae_lambda)
            advs.append(a)
            rets.append(r)
        return np.concatenate(advs), np.concatenate(rets)

    def surrogate_objective(self, obs_norm, actions_u, old_log_probs, advantages):
        """Mean clipped surrogate (the quantity updates ascend)."""
        mean, std, _ = self.policy_forward(obs_norm)
        logp = gaussian_log_prob(actions_u, mean, std)
        ratio = np.exp(logp - old_log_probs)
        eps = self.cfg.clip_epsilon
        clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps)
        return float(np.mean(np.minimum(ratio * advantages,
                                        clipped * advantages)))

    def _minibatch_loss_and_grads(self, obs_norm, actions_u, old_log_probs,
                                  advantages, returns):
        m = len(actions_u)
        mean_out, actor_cache = self.actor.forward(obs_norm)
        value_out, critic_cache = self.critic.forward(obs_norm)
        mean = mean_out[:, 0]
        value = value_out[:, 0]
        std = math.exp(float(self.log_std[0]))

        logp = gaussian_log_prob(actions_u, mean, std)
        ratio = np.exp(logp - old_log_probs)
        mean_ratio_dev = float(np.mean(np.abs(ratio - 1.0)))
        if mean_ratio_dev > 10.0:
            raise TrainingDivergedError(
                f"mean |ratio - 1| = {mean_ratio_dev:.3g} after "
                f"{self.updates_done} updates; policy moved too far")

        eps = self.cfg.clip_epsilon
        clipped_ratio = np.clip(ratio, 1.0 - eps, 1.0 + eps)
        unclipped = ratio * advantages
        clipped = clipped_ratio * advantages
        policy_loss = -float(np.mean(np.minimum(unclipped, clipped)))
        value_err = value - returns
        value_loss = float(np.mean(value_err ** 2))
        entropy = 0.5 * (1.0 + LOG_2PI) + float(self.log_std[0])
        loss = (policy_loss + self.cfg.value_coef * value_loss
                - self.cfg.entropy_coef * entropy)

        # d loss / d logp: only samples on the unclipped branch carry gradient.
        active = unclipped <= clipped
        dlogp = np.where(active, -(advantages * ratio) / m, 0.0)
        dmean = dlogp * (actions_u - mean) / (std * std)
        dlog_std = float(np.sum(dlogp * (((actions_u - mean) / std) ** 2 - 1.0)))
        dlog_std -= self.cfg.entropy_coef  # dH/dlog_std = 1
        dvalue = self.cfg.value_coef * 2.0 * value_err / m

        actor_grads = self.actor.backward(actor_cache, dmean[:, None])
        critic_grads = self.critic.backward(critic_cache, dvalue[:, None])
        grads = actor_grads + [np.array([dlog_std])] + critic_grads
        stats = {"policy_loss": policy_loss, "value_loss": value_loss,
                 "clip_fraction": float(np.mean(~active)),
                 "mean_ratio_dev": mean_ratio_dev}
        return loss, grads, stats

    def update(self, trajectories) -> dict:
        """One PPO update over a batch of trajectories; returns mean stats."""
        obs_norm = np.concatenate([t.obs_norm for t in trajectories])
        actions_u = np.concatenate([t.actions_u for t in trajectories])
        old_log_probs = np.concatenate([t.log_probs for t in trajectories])
        advantages, returns = self.compute_advantages(trajectories)
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)

        n = len(actions_u)
        stats_acc = []
        for _ in range(self.cfg.epochs_per_update):
            perm = self._shuffle_rng.permutation(n)
            for start in range(0, n, self.cfg.minibatch_size):
                idx = perm[start:start + self.cfg.minibatch_size]
                _, grads, stats = self._minibatch_loss_and_grads(
                    obs_norm[idx], actions_u[idx], old_log_probs[idx],
                    advantages[idx], returns[idx])
                stats["grad_norm"] = clip_grad_norm(grads, self.cfg.max_grad_norm)
                self.adam.step(self._params, grads)
                self.log_std[0] = min(LOG_STD_MAX, max(LOG_STD_MIN, self.log_std[0]))
                stats_acc.append(stats)
        self.updates_done += 1
        keys = stats_acc[0]
        out = {k: float(np.mean([s[k] for s in stats_acc])) for k in keys}
        out["batch_size"] = n
        return out

    # ----------------------------------------------------------- persistence

    def save(self, path) -> None:
        payload = {
            "format": "procrl-checkpoint-1",
            "config": self.cfg.to_dict(),
            "episode_spec": {
                "horizon_steps": self.spec.horizon_steps,
                "action_interval": self.spec.action_interval,
                "sv_low": self.spec.sv_low,
                "sv_high": self.spec.sv_high,
            },
            "obs_dim": self.obs_dim,
            "actor": self.actor.state_dict(),
            "critic": self.critic.state_dict(),
            "log_std": float(self.log_std[0]),
            "norm": self.norm.state_dict(),
            "updates_done": self.updates_done,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "PpoAgent":
        with open(path) as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
        if payload.get("format") != "procrl-checkpoint-1":
            raise CheckpointError(f"unknown checkpoint format in {path}")
        try:
            cfg = PpoConfig.from_dict(payload["config"])
            spec = EpisodeSpec(**payload["episode_spec"])
            agent = cls(cfg=cfg, spec=spec, seed=0,
                        obs_dim=int(payload["obs_dim"]))
            agent.actor.load_state_dict(payload["actor"])
            agent.critic.load_state_dict(payload["critic"])
            agent.log_std = np.array([float(payload["log_std"])])
            agent.norm.load_state_dict(payload["norm"])
            agent.updates_done = int(payload.get("updates_done", 0))
            agent._params = agent.actor.params + [agent.log_std] + agent.critic.params
            agent.adam = Adam(agent._params, lr=cfg.learning_rate)
        except (KeyError, ValueError, TypeError) as exc:
            raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
        return agent
