"""Experiment drivers: training runs, PID baseline, metrics and reports.

Two experiments mirror the workbench's evaluation protocol: a fixed
step-surge scenario trained to convergence and compared against constant-
setpoint PID control, and a randomized-scenario run whose 20-episode
moving average of cumulative reward documents the learning trend.  One
master seed fans out to the agent-init, rollout and scenario streams; all
emitted CSV files use repr floats so parsing them back is exact.
"""

import csv
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .env import FeedSectionEnv
from .malfunction import MalfunctionScenario, sample_scenario, step_surge
from .ppo import PpoAgent, PpoConfig

TRAINING_LOG_HEADER = ["update", "episode", "cumulative_reward",
                       "policy_loss", "value_loss"]
CURVE_HEADER = ["episode", "cumulative_reward", "moving_avg_20"]
PRESSURE_HEADER = ["t", "pressure"]

RECOVERY_EPS = 0.002   # MPa band around the normal value
RECOVERY_HOLD = 120.0  # s the trace must stay inside the band

DEFAULT_FIXED_UPDATES = 400
DEFAULT_VARIABLE_EPISODES = 1000
MOVING_AVERAGE_WINDOW = 20


def recovery_time(samples, sigma: float, eps: float = RECOVERY_EPS,
                  hold: float = RECOVERY_HOLD):
    """First offset tau such that |pressure - sigma| < eps holds on
    [tau, tau + hold]; None when the trace never settles.

    `samples` is a time-ordered iterable of (t, pressure) covering the
    whole window of interest; tau is measured from the first sample.
    """
    ts, ps = zip(*samples)
    n = len(ts)
    in_band = [abs(p - sigma) < eps for p in ps]
    run_end = [0] * n  # index one past the in-band run starting at i
    nxt = n
    for i in reversed(range(n)):
        if not in_band[i]:
            nxt = i
        run_end[i] = nxt if nxt > i else i
    for i in range(n):
        if in_band[i] and ts[run_end[i] - 1] - ts[i] >= hold:
            return ts[i] - ts[0]
    return None


def moving_average(xs, window: int = MOVING_AVERAGE_WINDOW):
    xs = list(xs)
    if len(xs) < window:
        return []
    csum = np.cumsum([0.0] + xs)
    return [(csum[i + window] - csum[i]) / window
            for i in range(len(xs) - window + 1)]


@dataclass
class EpisodeReport:
    scenario: MalfunctionScenario
    cumulative_reward: float
    recovery_time: float
    actions: list
    trace_path: str = None
    pressure_path: str = None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "cumulative_reward": self.cumulative_reward,
            "recovery_time": self.recovery_time,
            "actions": self.actions,
            "trace_path": self.trace_path,
            "pressure_path": self.pressure_path,
        }


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else repr(float(v)) for v in row])


def read_csv(path):
    """Parse a harness CSV back into floats (None for empty cells)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[None if v == "" else float(v) for v in row]
                        for row in reader]


def run_episode(env: FeedSectionEnv, scenario: MalfunctionScenario,
                policy, out_dir=None, tag: str = "episode") -> EpisodeReport:
    """Roll one full episode with policy(obs) -> setpoint; persist traces."""
    obs = env.reset(scenario)
    actions = []
    done = False
    while not done:
        action = float(policy(obs))
        obs, _, done, _ = env.step(action)
        actions.append(action)

    window = [(t, p) for t, p in env.pressure_history
              if t >= env.procedure_start_t]
    rec = recovery_time(window, env.reward_cfg.sigma)
    trace_path = pressure_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        trace_path = str(out_dir / f"{tag}_trace.csv")
        env.write_episode_csv(trace_path)
        pressure_path = str(out_dir / f"{tag}_pressure.csv")
        _write_csv(pressure_path, PRESSURE_HEADER, window)
        env.write_physics_csv(out_dir / f"{tag}_physics.csv")
    return EpisodeReport(scenario=scenario,
                         cumulative_reward=env.cumulative_reward,
                         recovery_time=rec, actions=actions,
                         trace_path=trace_path, pressure_path=pressure_path)


def run_baseline(scenario: MalfunctionScenario = None, out_dir=None,
                 env: FeedSectionEnv = None) -> EpisodeReport:
    """Standard PID control: the setpoint never leaves sigma."""
    env = env or FeedSectionEnv()
    scenario = scenario or step_surge(1.20)
    sigma = env.reward_cfg.sigma
    return run_episode(env, scenario, lambda obs: sigma, out_dir, tag="baseline")


def _seed_streams(master_seed: int):
    agent_seed, rollout_seed, scenario_seed = (
        int(s) for s in np.random.SeedSequence(master_seed).generate_state(3))
    return agent_seed, rollout_seed, scenario_seed


def _train(agent: PpoAgent, env_factory, n_updates: int, rollout_seed: int,
           log_rows: list) -> None:
    rng = np.random.default_rng(rollout_seed)
    episode = 0
    for update in range(1, n_updates + 1):
        trajectories = agent.collect_rollouts(
            env_factory, agent.cfg.episodes_per_update, rng)
        stats = agent.update(trajectories)
        for tr in trajectories:
            episode += 1
            log_rows.append([update, episode, tr.cumulative_reward,
                             stats["policy_loss"], stats["value_loss"]])


@dataclass
class FixedExperimentReport:
    scenario: MalfunctionScenario
    baseline: EpisodeReport
    trained: EpisodeReport
    log_rows: list
    master_seed: int
    updates: int
    runtime_s: float
    checkpoint_path: str = None
    log_path: str = None
    summary_path: str = None

    @property
    def improvement(self) -> float:
        return self.trained.cumulative_reward - self.baseline.cumulative_reward

    def to_dict(self) -> dict:
        return {
            "experiment": "fixed_malfunction",
            "master_seed": self.master_seed,
            "updates": self.updates,
            "runtime_s": self.runtime_s,
            "scenario": self.scenario.to_dict(),
            "baseline": self.baseline.to_dict(),
            "trained": self.trained.to_dict(),
            "improvement": self.improvement,
            "checkpoint_path": self.checkpoint_path,
            "log_path": self.log_path,
        }


def run_fixed_experiment(master_seed: int = 0,
                         updates: int = DEFAULT_FIXED_UPDATES,
                         ppo_cfg: PpoConfig = None,
                         scenario: MalfunctionScenario = None,
                         out_dir=None) -> FixedExperimentReport:
    """Train on the fixed step surge, then compare greedy policy vs PID."""
    t0 = time.time()
    ppo_cfg = ppo_cfg or PpoConfig()
    scenario = scenario or step_surge(1.20)
    agent_seed, rollout_seed, _ = _seed_streams(master_seed)
    agent = PpoAgent(cfg=ppo_cfg, seed=agent_seed)

    def factory(rng):
        return FeedSectionEnv(), scenario

    log_rows = []
    _train(agent, factory, updates, rollout_seed, log_rows)

    trained = run_episode(FeedSectionEnv(), scenario, agent.greedy_action,
                          out_dir, tag="trained")
    baseline = run_baseline(scenario, out_dir)
    report = FixedExperimentReport(
        scenario=scenario, baseline=baseline, trained=trained,
        log_rows=log_rows, master_seed=master_seed, updates=updates,
        runtime_s=time.time() - t0)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.checkpoint_path = str(out_dir / "checkpoint.json")
        agent.save(report.checkpoint_path)
        report.log_path = str(out_dir / "training_log.csv")
        _write_csv(report.log_path, TRAINING_LOG_HEADER, log_rows)
        report.summary_path = str(out_dir / "summary.json")
        with open(report.summary_path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return report


@dataclass
class VariableExperimentReport:
    episode_rewards: list
    moving_avg: list
    master_seed: int
    runtime_s: float
    log_path: str = None
    curve_path: str = None
    checkpoint_path: str = None
    summary_path: str = None

    @property
    def first_window_avg(self) -> float:
        return float(np.mean(self.episode_rewards[:MOVING_AVERAGE_WINDOW]))

    @property
    def final_window_avg(self) -> float:
        return float(np.mean(self.episode_rewards[-MOVING_AVERAGE_WINDOW:]))

    def to_dict(self) -> dict:
        return {
            "experiment": "variable_malfunction",
            "master_seed": self.master_seed,
            "episodes": len(self.episode_rewards),
            "runtime_s": self.runtime_s,
            "first_window_avg": self.first_window_avg,
            "final_window_avg": self.final_window_avg,
            "log_path": self.log_path,
            "curve_path": self.curve_path,
        }


def run_variable_experiment(master_seed: int = 0,
                            episodes: int = DEFAULT_VARIABLE_EPISODES,
                            ppo_cfg: PpoConfig = None,
                            train: bool = True,
                            out_dir=None) -> VariableExperimentReport:
    """Train with a freshly sampled ramp scenario every episode.

    With train=False the policy stays at its random initialization; that
    control run is the reference showing the trend is due to learning.
    """
    t0 = time.time()
    ppo_cfg = ppo_cfg or PpoConfig()
    agent_seed, rollout_seed, scenario_seed = _seed_streams(master_seed)
    agent = PpoAgent(cfg=ppo_cfg, seed=agent_seed)
    scenario_rng = np.random.default_rng(scenario_seed)
    rollout_rng = np.random.default_rng(rollout_seed)

    def factory(rng):
        return FeedSectionEnv(), sample_scenario(scenario_rng)

    rewards = []
    log_rows = []
    update = 0
    while len(rewards) < episodes:
        n = min(ppo_cfg.episodes_per_update, episodes - len(rewards))
        trajectories = agent.collect_rollouts(factory, n, rollout_rng)
        if train:
            stats = agent.update(trajectories)
            update += 1
        else:
            stats = {"policy_loss": None, "value_loss": None}
        for tr in trajectories:
            rewards.append(tr.cumulative_reward)
            log_rows.append([update, len(rewards), tr.cumulative_reward,
                             stats["policy_loss"], stats["value_loss"]])

    avg = moving_average(rewards)
    report = VariableExperimentReport(
        episode_rewards=rewards, moving_avg=avg, master_seed=master_seed,
        runtime_s=time.time() - t0)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.log_path = str(out_dir / "training_log.csv")
        _write_csv(report.log_path, TRAINING_LOG_HEADER, log_rows)
        curve_rows = [
            [i + 1, r, avg[i - MOVING_AVERAGE_WINDOW + 1]
             if i >= MOVING_AVERAGE_WINDOW - 1 else None]
            for i, r in enumerate(rewards)]
        report.curve_path = str(out_dir / "reward_curve.csv")
        _write_csv(report.curve_path, CURVE_HEADER, curve_rows)
        report.checkpoint_path = str(out_dir / "checkpoint.json")
        agent.save(report.checkpoint_path)
        report.summary_path = str(out_dir / "summary.json")
        with open(report.summary_path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return report


def evaluate_policy(checkpoint_path, scenario: MalfunctionScenario,
                    seed: int = 0, out_dir=None) -> EpisodeReport:
    """Greedy (mean-action) episode from a checkpoint; trace persisted.

    The checkpoint is fully validated before any simulation starts, so a
    corrupt file never leaves a partial run behind.
    """
    agent = PpoAgent.load(checkpoint_path)
    del seed  # greedy evaluation draws no random numbers
    env = FeedSectionEnv(spec=agent.spec)
    return run_episode(env, scenario, agent.greedy_action, out_dir, tag="eval")
