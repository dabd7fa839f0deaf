"""Feed-pressure malfunction profiles and randomized scenario sampling.

A scenario multiplies the fresh-ethylene header pressure by `magnitude`,
either instantly (step) or linearly over `t_complete` seconds (ramp).
`t_procedure_start` is the delay between malfunction onset and the first
agent action; the plant runs under PID alone during the delay and the
30-minute reward window starts when the procedure starts.
"""

import json
from dataclasses import dataclass

import numpy as np

STEP = "step"
RAMP = "ramp"

MAGNITUDE_RANGE = (0.90, 1.20)
T_COMPLETE_RANGE = (0.0, 1800.0)
T_PROCEDURE_START_RANGE = (0.0, 3600.0)


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class MalfunctionScenario:
    kind: str                      # "step" | "ramp"
    magnitude: float               # multiplier on the nominal feed pressure
    t_complete: float = 0.0        # s, ramp duration (0 for step)
    t_procedure_start: float = 0.0  # s, delay before the first agent action
    onset: float = 0.0             # s, malfunction start (fixed at 0)

    def __post_init__(self):
        if self.kind not in (STEP, RAMP):
            raise ScenarioError(f"kind must be '{STEP}' or '{RAMP}', got {self.kind!r}")
        if not MAGNITUDE_RANGE[0] <= self.magnitude <= MAGNITUDE_RANGE[1]:
            raise ScenarioError(
                f"magnitude {self.magnitude} outside {MAGNITUDE_RANGE}")
        if not T_COMPLETE_RANGE[0] <= self.t_complete <= T_COMPLETE_RANGE[1]:
            raise ScenarioError(
                f"t_complete {self.t_complete} outside {T_COMPLETE_RANGE}")
        if self.kind == STEP and self.t_complete != 0.0:
            raise ScenarioError("a step scenario must have t_complete = 0")
        if not (T_PROCEDURE_START_RANGE[0] <= self.t_procedure_start
                <= T_PROCEDURE_START_RANGE[1]):
            raise ScenarioError(
                f"t_procedure_start {self.t_procedure_start} outside "
                f"{T_PROCEDURE_START_RANGE}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "magnitude": self.magnitude,
            "t_complete": self.t_complete,
            "t_procedure_start": self.t_procedure_start,
            "onset": self.onset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MalfunctionScenario":
        return cls(**d)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "MalfunctionScenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def null_scenario() -> MalfunctionScenario:
    """Magnitude 1.0: the feed pressure never moves."""
    return MalfunctionScenario(kind=STEP, magnitude=1.0)


def step_surge(magnitude: float = 1.20, t_procedure_start: float = 0.0) -> MalfunctionScenario:
    """The fixed experiment's scenario: an instant feed-pressure surge."""
    return MalfunctionScenario(kind=STEP, magnitude=magnitude,
                               t_procedure_start=t_procedure_start)


def feed_pressure_at(s: MalfunctionScenario, nominal: float, t: float) -> float:
    """Header pressure at time t under the scenario profile.

    A ramp with t_complete = 0 degenerates to the step profile.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t < s.onset:
        return nominal
    if s.kind == STEP or s.t_complete <= 0.0:
        return nominal * s.magnitude
    if t >= s.onset + s.t_complete:
        return nominal * s.magnitude
    frac = (t - s.onset) / s.t_complete
    return nominal * (1.0 + (s.magnitude - 1.0) * frac)


def sample_scenario(rng, kind: str = RAMP,
                    magnitude_range=MAGNITUDE_RANGE,
                    t_complete_range=T_COMPLETE_RANGE,
                    t_procedure_start_range=T_PROCEDURE_START_RANGE) -> MalfunctionScenario:
    """Draw a scenario with uniformly sampled parameters.

    `rng` is an int seed or a numpy Generator; a fixed seed always yields
    the same scenario.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    magnitude = float(rng.uniform(*magnitude_range))
    t_complete = float(rng.uniform(*t_complete_range)) if kind == RAMP else 0.0
    t_proc = float(rng.uniform(*t_procedure_start_range))
    return MalfunctionScenario(kind=kind, magnitude=magnitude,
                               t_complete=t_complete, t_procedure_start=t_proc)
