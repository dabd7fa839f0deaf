"""Lumped-parameter dynamic model of the vaporizer feed section.

Fresh ethylene gas enters through control valve PCV101 into the vaporizer
V130, liquid feed enters through LCV130, liquid vaporizes into the gas
space, and gas leaves toward the downstream section.  Two states are
integrated: vaporizer gas pressure (molar balance, isothermal ideal gas)
and liquid level (volumetric balance).  Valve flows follow the usual
square-root characteristic.

All pressures are in MPa, flows in kmol/s (gas) or m3/s (liquid),
levels in m, time in s.
"""

import csv
import math
from dataclasses import dataclass

from .pid import PidController, pid_step

# Calibrated normal operating point: vaporizer pressure held by PC130.
NORMAL_PRESSURE = 0.784
# Liquid level target held by LC130.
NORMAL_LEVEL = 1.0

TRACE_HEADER = ["t", "pressure", "level", "x_pcv", "x_lcv", "feed_pressure", "fi101_flow"]


class NonFiniteStateError(RuntimeError):
    """Integration produced NaN/Inf; the model is mis-calibrated or mis-driven."""


class NoSteadyStateError(ValueError):
    """No steady operating point exists for the requested targets."""


@dataclass(frozen=True)
class PlantConfig:
    """Calibration constants of the feed-section model.

    gas_capacity converts net molar flow into the vaporizer gas space to a
    pressure rate (MPa per kmol); it sets the open-loop pressure time
    constant (~22 s at the default operating point).
    """

    gas_capacity: float = 0.01          # MPa per kmol
    tank_area: float = 2.0              # m2
    cv_pcv: float = 2.0                 # kmol/s per sqrt(MPa), PCV101
    cv_lcv: float = 0.04                # m3/s per sqrt(MPa), LCV130
    cv_out: float = 1.75                # kmol/s per sqrt(MPa), outlet
    nominal_feed_pressure: float = 0.90  # MPa, fresh ethylene header
    liquid_supply_pressure: float = 1.00  # MPa
    downstream_pressure: float = 0.70   # MPa
    vaporization_rate: float = 0.30     # kmol/s per m of level above level_min
    level_min: float = 0.5              # m, below this nothing vaporizes
    liquid_molar_volume: float = 0.05   # m3/kmol of the liquid feed
    integration_dt: float = 1.0         # s

    def __post_init__(self):
        positive = [
            ("gas_capacity", self.gas_capacity),
            ("tank_area", self.tank_area),
            ("cv_pcv", self.cv_pcv),
            ("cv_lcv", self.cv_lcv),
            ("cv_out", self.cv_out),
            ("vaporization_rate", self.vaporization_rate),
            ("liquid_molar_volume", self.liquid_molar_volume),
        ]
        for name, value in positive:
            if not value > 0:
                raise ValueError(f"PlantConfig.{name} must be > 0, got {value}")
        if not self.nominal_feed_pressure > self.downstream_pressure:
            raise ValueError("nominal_feed_pressure must exceed downstream_pressure")
        if not self.integration_dt > 0:
            raise ValueError("integration_dt must be > 0")
        n = 60.0 / self.integration_dt
        if abs(n - round(n)) > 1e-9:
            raise ValueError("integration_dt must divide the 60 s control interval exactly")

    def to_dict(self) -> dict:
        return {
            "gas_capacity": self.gas_capacity,
            "tank_area": self.tank_area,
            "cv_pcv": self.cv_pcv,
            "cv_lcv": self.cv_lcv,
            "cv_out": self.cv_out,
            "nominal_feed_pressure": self.nominal_feed_pressure,
            "liquid_supply_pressure": self.liquid_supply_pressure,
            "downstream_pressure": self.downstream_pressure,
            "vaporization_rate": self.vaporization_rate,
            "level_min": self.level_min,
            "liquid_molar_volume": self.liquid_molar_volume,
            "integration_dt": self.integration_dt,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlantConfig":
        return cls(**d)


@dataclass(frozen=True)
class PlantState:
    """Continuous physical state plus the inputs it was last driven with."""

    t: float
    pressure: float       # MPa, vaporizer gas pressure
    level: float          # m, vaporizer liquid level
    x_pcv: float          # PCV101 opening in [0, 1]
    x_lcv: float          # LCV130 opening in [0, 1]
    feed_pressure: float  # MPa, current fresh-ethylene header pressure
    fi101_flow: float     # kmol/s, last computed feed flow

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v)
            for v in (self.t, self.pressure, self.level, self.x_pcv,
                      self.x_lcv, self.feed_pressure, self.fi101_flow)
        )


SENSOR_FIELDS = (
    "fi101_flow",
    "vaporizer_pressure",
    "vaporizer_level",
    "x_pcv",
    "x_lcv",
    "pc130_sv",
    "outlet_flow",
)


@dataclass(frozen=True)
class SensorVector:
    """The seven plant readings exposed to the agent, in fixed order."""

    fi101_flow: float
    vaporizer_pressure: float
    vaporizer_level: float
    x_pcv: float
    x_lcv: float
    pc130_sv: float
    outlet_flow: float

    def as_tuple(self) -> tuple:
        return (self.fi101_flow, self.vaporizer_pressure, self.vaporizer_level,
                self.x_pcv, self.x_lcv, self.pc130_sv, self.outlet_flow)

    def as_dict(self) -> dict:
        return dict(zip(SENSOR_FIELDS, self.as_tuple()))


def valve_flow(cv: float, opening: float, p_up: float, p_down: float) -> float:
    """Square-root valve characteristic; zero for closed valve or reverse differential."""
    if cv < 0:
        raise ValueError("valve coefficient must be >= 0")
    if not 0.0 <= opening <= 1.0:
        raise ValueError(f"valve opening must be in [0, 1], got {opening}")
    return cv * opening * math.sqrt(max(0.0, p_up - p_down))


def vaporization_flow(cfg: PlantConfig, level: float) -> float:
    """Molar vaporization rate; proportional to liquid level above the minimum."""
    return cfg.vaporization_rate * max(0.0, level - cfg.level_min)


def net_molar_flow(cfg: PlantConfig, pressure: float, level: float,
                   x_pcv: float, feed_pressure: float) -> float:
    """Net molar flow into the gas space (kmol/s): feed + vaporization - outlet."""
    f_in = valve_flow(cfg.cv_pcv, x_pcv, feed_pressure, pressure)
    vap = vaporization_flow(cfg, level)
    f_out = valve_flow(cfg.cv_out, 1.0, pressure, cfg.downstream_pressure)
    return (f_in + vap) - f_out


def net_volume_flow(cfg: PlantConfig, pressure: float, level: float, x_lcv: float) -> float:
    """Net volumetric flow into the liquid (m3/s): liquid feed - vaporized volume."""
    f_liq = valve_flow(cfg.cv_lcv, x_lcv, cfg.liquid_supply_pressure, pressure)
    drawn = cfg.liquid_molar_volume * vaporization_flow(cfg, level)
    return f_liq - drawn


def derivatives(state: PlantState, cfg: PlantConfig) -> tuple:
    """Rates of change (dP/dt in MPa/s, dL/dt in m/s) at the given state."""
    dp = cfg.gas_capacity * net_molar_flow(
        cfg, state.pressure, state.level, state.x_pcv, state.feed_pressure)
    dl = net_volume_flow(cfg, state.pressure, state.level, state.x_lcv) / cfg.tank_area
    return dp, dl


def _rates(cfg, pressure, level, x_pcv, x_lcv, feed_pressure):
    dp = cfg.gas_capacity * net_molar_flow(cfg, pressure, level, x_pcv, feed_pressure)
    dl = net_volume_flow(cfg, pressure, level, x_lcv) / cfg.tank_area
    return dp, dl


def rk4_step(cfg: PlantConfig, pressure: float, level: float, x_pcv: float,
             x_lcv: float, feed_pressure: float, dt: float) -> tuple:
    """Classical 4th-order Runge-Kutta on (pressure, level); inputs held over dt."""
    k1p, k1l = _rates(cfg, pressure, level, x_pcv, x_lcv, feed_pressure)
    k2p, k2l = _rates(cfg, pressure + 0.5 * dt * k1p, level + 0.5 * dt * k1l,
                      x_pcv, x_lcv, feed_pressure)
    k3p, k3l = _rates(cfg, pressure + 0.5 * dt * k2p, level + 0.5 * dt * k2l,
                      x_pcv, x_lcv, feed_pressure)
    k4p, k4l = _rates(cfg, pressure + dt * k3p, level + dt * k3l,
                      x_pcv, x_lcv, feed_pressure)
    p_next = pressure + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    l_next = level + (dt / 6.0) * (k1l + 2.0 * k2l + 2.0 * k3l + k4l)
    return p_next, l_next


@dataclass(frozen=True)
class StepResult:
    state: PlantState
    pc130: PidController
    lc130: PidController


def step(state: PlantState, pc130: PidController, lc130: PidController,
         feed_pressure: float, cfg: PlantConfig, dt: float = None) -> StepResult:
    """Advance the plant by one control/integration interval.

    Both PID loops execute first on the current measurements (zero-order
    hold on the valve commands), then the physics integrates over dt.
    dt = 0 is the identity.
    """
    if dt is None:
        dt = cfg.integration_dt
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0:
        return StepResult(state, pc130, lc130)

    pc130, x_pcv = pid_step(pc130, state.pressure, dt)
    lc130, x_lcv = pid_step(lc130, state.level, dt)

    p_next, l_next = rk4_step(cfg, state.pressure, state.level, x_pcv, x_lcv,
                              feed_pressure, dt)
    fi101 = valve_flow(cfg.cv_pcv, x_pcv, feed_pressure, p_next)
    new_state = PlantState(
        t=state.t + dt,
        pressure=p_next,
        level=l_next,
        x_pcv=x_pcv,
        x_lcv=x_lcv,
        feed_pressure=feed_pressure,
        fi101_flow=fi101,
    )
    if not new_state.is_finite():
        raise NonFiniteStateError(
            f"non-finite plant state at t={state.t + dt}: "
            f"pressure={p_next}, level={l_next}, x_pcv={x_pcv}, x_lcv={x_lcv}"
        )
    return StepResult(new_state, pc130, lc130)


@dataclass(frozen=True)
class SteadyOperatingPoint:
    """Solved steady state plus the controller biases that hold it."""

    state: PlantState
    pc130_bias: float
    lc130_bias: float


def _refine_opening(x0: float, residual) -> float:
    """Walk x in ulps until residual(x) evaluates to exactly 0.0.

    residual must be monotone increasing in x near x0.  The walk makes the
    solved operating point a bit-exact RK4 fixpoint, so an undisturbed
    simulation does not drift at all.  Falls back to the minimal-|residual|
    float if no exact zero exists within the search range.
    """
    x, best_x, best_r = x0, x0, abs(residual(x0))
    for _ in range(4000):
        r = residual(x)
        if r == 0.0:
            return x
        if abs(r) < best_r:
            best_x, best_r = x, abs(r)
        x = math.nextafter(x, -math.inf if r > 0 else math.inf)
    return best_x


def steady_state(cfg: PlantConfig, target_pressure: float = NORMAL_PRESSURE,
                 target_level: float = NORMAL_LEVEL) -> SteadyOperatingPoint:
    """Solve valve openings so both balances are exactly zero at the targets.

    Raises NoSteadyStateError when the targets are unreachable with the
    given coefficients (openings would leave the open interval (0, 1), or a
    pressure differential has the wrong sign).
    """
    if not target_pressure > cfg.downstream_pressure:
        raise NoSteadyStateError(
            "target pressure must exceed downstream pressure for outlet flow")
    if not cfg.nominal_feed_pressure > target_pressure:
        raise NoSteadyStateError(
            "nominal feed pressure must exceed target pressure for feed flow")
    if not cfg.liquid_supply_pressure > target_pressure:
        raise NoSteadyStateError(
            "liquid supply pressure must exceed target pressure for liquid feed")

    vap = vaporization_flow(cfg, target_level)
    f_out = valve_flow(cfg.cv_out, 1.0, target_pressure, cfg.downstream_pressure)
    feed_needed = f_out - vap
    if feed_needed <= 0:
        raise NoSteadyStateError(
            "vaporization alone exceeds the outlet flow; pressure cannot hold")

    x_pcv = feed_needed / (cfg.cv_pcv * math.sqrt(cfg.nominal_feed_pressure - target_pressure))
    drawn = cfg.liquid_molar_volume * vap
    x_lcv = drawn / (cfg.cv_lcv * math.sqrt(cfg.liquid_supply_pressure - target_pressure))
    if not 0.0 < x_pcv < 1.0:
        raise NoSteadyStateError(f"steady PCV101 opening {x_pcv:.4f} outside (0, 1)")
    if not 0.0 < x_lcv < 1.0:
        raise NoSteadyStateError(f"steady LCV130 opening {x_lcv:.4f} outside (0, 1)")

    x_pcv = _refine_opening(
        x_pcv,
        lambda x: net_molar_flow(cfg, target_pressure, target_level, x,
                                 cfg.nominal_feed_pressure))
    x_lcv = _refine_opening(
        x_lcv,
        lambda x: net_volume_flow(cfg, target_pressure, target_level, x))

    fi101 = valve_flow(cfg.cv_pcv, x_pcv, cfg.nominal_feed_pressure, target_pressure)
    state = PlantState(
        t=0.0,
        pressure=target_pressure,
        level=target_level,
        x_pcv=x_pcv,
        x_lcv=x_lcv,
        feed_pressure=cfg.nominal_feed_pressure,
        fi101_flow=fi101,
    )
    return SteadyOperatingPoint(state=state, pc130_bias=x_pcv, lc130_bias=x_lcv)


def observe(state: PlantState, pc130: PidController, cfg: PlantConfig) -> SensorVector:
    """Project the plant state onto the seven sensor readings."""
    outlet = valve_flow(cfg.cv_out, 1.0, state.pressure, cfg.downstream_pressure)
    vec = SensorVector(
        fi101_flow=state.fi101_flow,
        vaporizer_pressure=state.pressure,
        vaporizer_level=state.level,
        x_pcv=state.x_pcv,
        x_lcv=state.x_lcv,
        pc130_sv=pc130.sv,
        outlet_flow=outlet,
    )
    if not all(math.isfinite(v) for v in vec.as_tuple()):
        raise NonFiniteStateError(f"non-finite sensor vector at t={state.t}")
    return vec


def trace_row(state: PlantState) -> list:
    return [state.t, state.pressure, state.level, state.x_pcv, state.x_lcv,
            state.feed_pressure, state.fi101_flow]


def write_trace_csv(path, rows) -> None:
    """Write a physics trace; floats use repr so parsing round-trips exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def read_trace_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header: {header}")
        return [[float(v) for v in row] for row in reader]
