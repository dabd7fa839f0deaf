"""Episodic RL environment over the feed-section plant.

One episode is a 30-minute simulation with one agent action per minute:
the continuous setpoint of PC130.  The reward after each action is
max(0, 1 - a * |pressure - sigma|), evaluated at the end of the minute.
An undisturbed episode driven with the constant action sigma keeps the
plant at its calibrated fixpoint, so the cumulative reward is exactly 30.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import plant
from .malfunction import MalfunctionScenario, feed_pressure_at, null_scenario
from .pid import pressure_controller, level_controller, set_sv

EPISODE_CSV_HEADER = ["step", "action", *plant.SENSOR_FIELDS, "reward"]


@dataclass(frozen=True)
class RewardConfig:
    a: float = 50.0        # scale factor per MPa of deviation
    sigma: float = plant.NORMAL_PRESSURE  # normal-state pressure, MPa

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("reward scale a must be > 0")


@dataclass(frozen=True)
class EpisodeSpec:
    horizon_steps: int = 30
    action_interval: float = 60.0  # s between agent actions
    sv_low: float = 0.70           # MPa, agent action bounds on the PC130 SV
    sv_high: float = 0.88

    def __post_init__(self):
        if abs(self.horizon_steps * self.action_interval - 1800.0) > 1e-9:
            raise ValueError("episode must span 30 minutes "
                             "(horizon_steps * action_interval = 1800 s)")
        if not self.sv_low < self.sv_high:
            raise ValueError("sv_low must be < sv_high")


def reward(s_t: float, cfg: RewardConfig) -> float:
    """max(0, 1 - a * |s_t - sigma|); in [0, 1]."""
    if not math.isfinite(s_t):
        raise ValueError("sensor value must be finite")
    return max(0.0, 1.0 - cfg.a * abs(s_t - cfg.sigma))


class FeedSectionEnv:
    """Binds plant, PID loops and a malfunction scenario into episodes.

    Instances are single-threaded and independent; physics is fully
    deterministic, so identical (scenario, action sequence) pairs yield
    bit-identical trajectories.  The `seed` argument of reset is kept for
    interface compatibility with stochastic environments and is unused.
    """

    def __init__(self, cfg: plant.PlantConfig = None,
                 reward_cfg: RewardConfig = None,
                 spec: EpisodeSpec = None):
        self.cfg = cfg or plant.PlantConfig()
        self.reward_cfg = reward_cfg or RewardConfig()
        self.spec = spec or EpisodeSpec()
        steps = self.spec.action_interval / self.cfg.integration_dt
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("integration_dt must divide the action interval")
        self._steps_per_action = int(round(steps))
        self._op = plant.steady_state(self.cfg, self.reward_cfg.sigma)
        self.scenario = null_scenario()
        self.state = None
        self.pc130 = None
        self.lc130 = None
        self.steps_taken = 0
        self.trace = []             # one row per agent step, EPISODE_CSV_HEADER order
        self.pressure_history = []  # (t, pressure) every integration step
        self.physics_rows = []      # full plant rows at integration resolution
        self.clamped_actions = 0
        self.procedure_start_t = 0.0

    @property
    def operating_point(self) -> plant.SteadyOperatingPoint:
        return self._op

    @property
    def cumulative_reward(self) -> float:
        return sum(row[-1] for row in self.trace)

    def observe(self) -> plant.SensorVector:
        return plant.observe(self.state, self.pc130, self.cfg)

    def reset(self, scenario: MalfunctionScenario = None, seed=None) -> np.ndarray:
        """Start an episode: steady state, scenario onset, PID-only delay."""
        del seed  # physics is deterministic; no noise source to seed
        self.scenario = scenario or null_scenario()
        op = self._op
        feed0 = feed_pressure_at(self.scenario, self.cfg.nominal_feed_pressure, 0.0)
        # The flowmeter reads the instantaneous flow, so a step surge is
        # visible on FI101 at t=0+ even before any integration.
        fi101 = plant.valve_flow(self.cfg.cv_pcv, op.state.x_pcv, feed0,
                                 op.state.pressure)
        self.state = plant.PlantState(
            t=0.0, pressure=op.state.pressure, level=op.state.level,
            x_pcv=op.state.x_pcv, x_lcv=op.state.x_lcv,
            feed_pressure=feed0, fi101_flow=fi101)
        self.pc130 = pressure_controller(
            bias=op.pc130_bias, sv=self.reward_cfg.sigma,
            sv_bounds=(self.spec.sv_low, self.spec.sv_high))
        self.lc130 = level_controller(bias=op.lc130_bias, sv=op.state.level)
        self.steps_taken = 0
        self.trace = []
        self.pressure_history = [(self.state.t, self.state.pressure)]
        self.physics_rows = [plant.trace_row(self.state)]
        self.clamped_actions = 0

        # Procedure-start delay: PID alone, quantized to the integration grid.
        delay_steps = int(self.scenario.t_procedure_start // self.cfg.integration_dt)
        for _ in range(delay_steps):
            self._advance_one_dt()
        self.procedure_start_t = self.state.t
        return self._obs_array()

    def step(self, action: float) -> tuple:
        """Apply one setpoint action and simulate one action interval."""
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        if self.steps_taken >= self.spec.horizon_steps:
            raise RuntimeError("episode is over; call reset()")

        requested = float(action)
        clamped = min(self.spec.sv_high, max(self.spec.sv_low, requested))
        was_clamped = clamped != requested
        if was_clamped:
            self.clamped_actions += 1
        self.pc130 = set_sv(self.pc130, clamped)

        for _ in range(self._steps_per_action):
            self._advance_one_dt()

        r = reward(self.state.pressure, self.reward_cfg)
        self.steps_taken += 1
        done = self.steps_taken >= self.spec.horizon_steps
        sensors = self.observe()
        self.trace.append([self.steps_taken, clamped, *sensors.as_tuple(), r])
        info = {
            "t": self.state.t,
            "action_clamped": was_clamped,
            "requested_action": requested,
        }
        return self._obs_array(), r, done, info

    def _advance_one_dt(self) -> None:
        feed = feed_pressure_at(self.scenario, self.cfg.nominal_feed_pressure,
                                self.state.t)
        result = plant.step(self.state, self.pc130, self.lc130, feed, self.cfg)
        self.state, self.pc130, self.lc130 = result.state, result.pc130, result.lc130
        self.pressure_history.append((self.state.t, self.state.pressure))
        self.physics_rows.append(plant.trace_row(self.state))

    def _obs_array(self) -> np.ndarray:
        return np.array(self.observe().as_tuple(), dtype=np.float64)

    def write_episode_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(EPISODE_CSV_HEADER)
            for row in self.trace:
                writer.writerow([repr(float(v)) for v in row])

    def write_physics_csv(self, path) -> None:
        """Full plant trajectory at integration resolution."""
        plant.write_trace_csv(path, self.physics_rows)
