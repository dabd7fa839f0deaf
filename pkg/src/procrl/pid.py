"""Discrete-time PID controllers for the feed-section loops.

Positional form with derivative on the measurement and clamping
anti-windup.  Controllers are immutable values: each step returns an
updated copy, which keeps episode replay deterministic and makes the
controllers safe to copy between rollout workers.

Action convention follows ISA: a reverse-acting controller reduces its
output when the measurement rises.  PC130 (pressure -> PCV101) and LC130
(level -> LCV130) are both reverse acting: rising pressure or level closes
the corresponding valve.
"""

import math
from dataclasses import dataclass, replace

DIRECT = "direct"
REVERSE = "reverse"


class SetpointRangeError(ValueError):
    """Requested setpoint lies outside the declared SV bounds of the loop."""


@dataclass(frozen=True)
class PidController:
    kp: float
    ki: float
    kd: float
    sv: float                 # setpoint, PV units
    bias: float               # steady output, MV units
    direction: str = REVERSE
    mv_min: float = 0.0
    mv_max: float = 1.0
    sv_min: float = -math.inf
    sv_max: float = math.inf
    integral: float = 0.0     # accumulated error * s
    last_pv: float = None

    def __post_init__(self):
        if self.direction not in (DIRECT, REVERSE):
            raise ValueError(f"direction must be '{DIRECT}' or '{REVERSE}'")
        if not self.mv_min < self.mv_max:
            raise ValueError("mv_min must be < mv_max")
        if not self.sv_min <= self.sv <= self.sv_max:
            raise SetpointRangeError(
                f"sv={self.sv} outside [{self.sv_min}, {self.sv_max}]")


def _error(c: PidController, pv: float) -> float:
    # Reverse action: output falls as PV rises, so the error is sv - pv.
    return c.sv - pv if c.direction == REVERSE else pv - c.sv


def pid_step(c: PidController, pv: float, dt: float) -> tuple:
    """One controller execution; returns (updated controller, output).

    The integral is frozen whenever the unclamped output is saturated and
    the current error would push it further into saturation.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    e = _error(c, pv)
    last_pv = pv if c.last_pv is None else c.last_pv
    dpv = (pv - last_pv) / dt
    deriv = -c.kd * dpv if c.direction == REVERSE else c.kd * dpv

    integral = c.integral + e * dt
    mv_raw = c.bias + c.kp * e + c.ki * integral + deriv
    if (mv_raw > c.mv_max and e > 0) or (mv_raw < c.mv_min and e < 0):
        integral = c.integral  # anti-windup: hold the integral
        mv_raw = c.bias + c.kp * e + c.ki * integral + deriv

    mv = min(c.mv_max, max(c.mv_min, mv_raw))
    return replace(c, integral=integral, last_pv=pv), mv


def set_sv(c: PidController, sv: float) -> PidController:
    """Change the setpoint only; the integrator is preserved (bumpless)."""
    if not c.sv_min <= sv <= c.sv_max:
        raise SetpointRangeError(
            f"sv={sv} outside [{c.sv_min}, {c.sv_max}] for this loop")
    return replace(c, sv=sv)


def pressure_controller(bias: float, sv: float, sv_bounds=(0.70, 0.88),
                        kp: float = 5.0, ki: float = 2e-4, kd: float = 0.0) -> PidController:
    """PC130 with the default sluggish tuning.

    The integral gain is deliberately small: a 20% feed-pressure surge is
    not rejected within 30 minutes under constant setpoint, which is the
    behaviour the setpoint agent is trained to beat.
    """
    return PidController(kp=kp, ki=ki, kd=kd, sv=sv, bias=bias,
                         direction=REVERSE, sv_min=sv_bounds[0], sv_max=sv_bounds[1])


def level_controller(bias: float, sv: float, sv_bounds=(0.6, 1.4),
                     kp: float = 1.0, ki: float = 2e-4, kd: float = 0.0) -> PidController:
    """LC130: keeps the vaporizer liquid level at its target."""
    return PidController(kp=kp, ki=ki, kd=kd, sv=sv, bias=bias,
                         direction=REVERSE, sv_min=sv_bounds[0], sv_max=sv_bounds[1])
