"""Recovery-procedure workbench for a vaporizer feed section.

A dynamic model of the raw-material feed section, its two PID loops, a
feed-pressure malfunction engine, an episodic RL environment over the
PC130 setpoint, a PPO agent, a qualitative influence-graph planner with
operator-readable explanations, experiment drivers, and a session service
for the operator console.
"""

from .env import EpisodeSpec, FeedSectionEnv, RewardConfig, reward
from .influence import (InfluenceGraph, diagnose, explain, load_default_rules,
                        load_rules, parse_rules, plan)
from .malfunction import (MalfunctionScenario, feed_pressure_at, null_scenario,
                          sample_scenario, step_surge)
from .pid import PidController, pid_step, set_sv
from .plant import (NORMAL_LEVEL, NORMAL_PRESSURE, PlantConfig, PlantState,
                    SensorVector, derivatives, observe, steady_state, step,
                    valve_flow)
from .ppo import PpoAgent, PpoConfig, Trajectory, gae

__version__ = "0.1.0"

__all__ = [
    "EpisodeSpec", "FeedSectionEnv", "RewardConfig", "reward",
    "InfluenceGraph", "diagnose", "explain", "load_default_rules",
    "load_rules", "parse_rules", "plan",
    "MalfunctionScenario", "feed_pressure_at", "null_scenario",
    "sample_scenario", "step_surge",
    "PidController", "pid_step", "set_sv",
    "NORMAL_LEVEL", "NORMAL_PRESSURE", "PlantConfig", "PlantState",
    "SensorVector", "derivatives", "observe", "steady_state", "step",
    "valve_flow",
    "PpoAgent", "PpoConfig", "Trajectory", "gae",
    "__version__",
]
