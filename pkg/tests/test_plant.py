import math

import pytest

from procrl import plant
from procrl.pid import PidController, pressure_controller, level_controller
from procrl.malfunction import step_surge, feed_pressure_at


@pytest.fixture(scope="module")
def cfg():
    return plant.PlantConfig()


@pytest.fixture(scope="module")
def op(cfg):
    return plant.steady_state(cfg)


def make_controllers(op):
    pc = pressure_controller(bias=op.pc130_bias, sv=plant.NORMAL_PRESSURE)
    lc = level_controller(bias=op.lc130_bias, sv=op.state.level)
    return pc, lc


class TestValveFlow:
    def test_closed_valve(self):
        assert plant.valve_flow(1.0, 0.0, 0.9, 0.784) == 0.0

    def test_zero_differential(self):
        assert plant.valve_flow(1.0, 0.5, 0.8, 0.8) == 0.0

    def test_hand_evaluation(self):
        # 0.5 * sqrt(0.824 - 0.784) = 0.5 * sqrt(0.04) = 0.1
        assert plant.valve_flow(1.0, 0.5, 0.824, 0.784) == pytest.approx(0.1, abs=1e-12)

    def test_reverse_differential_clamps_to_zero(self):
        assert plant.valve_flow(2.0, 1.0, 0.5, 0.9) == 0.0

    def test_rejects_out_of_range_opening(self):
        with pytest.raises(ValueError):
            plant.valve_flow(1.0, 1.5, 0.9, 0.7)


class TestConfig:
    def test_rejects_nonpositive_coefficient(self):
        with pytest.raises(ValueError):
            plant.PlantConfig(cv_pcv=0.0)

    def test_rejects_dt_not_dividing_control_interval(self):
        with pytest.raises(ValueError):
            plant.PlantConfig(integration_dt=7.0)

    def test_rejects_feed_below_downstream(self):
        with pytest.raises(ValueError):
            plant.PlantConfig(nominal_feed_pressure=0.6, downstream_pressure=0.7)

    def test_dict_round_trip(self, cfg):
        assert plant.PlantConfig.from_dict(cfg.to_dict()) == cfg


class TestDerivatives:
    def test_steady_state_is_equilibrium(self, cfg, op):
        dp, dl = plant.derivatives(op.state, cfg)
        assert abs(dp) < 1e-9
        assert abs(dl) < 1e-9

    def test_opening_pcv_raises_pressure(self, cfg, op):
        from dataclasses import replace
        bumped = replace(op.state, x_pcv=op.state.x_pcv + 0.05)
        dp, _ = plant.derivatives(bumped, cfg)
        assert dp > 0

    def test_no_liquid_inflow_drains_level(self, cfg, op):
        from dataclasses import replace
        closed = replace(op.state, x_lcv=0.0)
        _, dl = plant.derivatives(closed, cfg)
        assert dl < 0


class TestMonotoneCausality:
    """Signs of the qualitative influence rules, by central finite differences."""

    def test_feed_pressure_raises_fi101_flow(self, cfg, op):
        h = 1e-6
        s = op.state
        up = plant.valve_flow(cfg.cv_pcv, s.x_pcv, s.feed_pressure + h, s.pressure)
        dn = plant.valve_flow(cfg.cv_pcv, s.x_pcv, s.feed_pressure - h, s.pressure)
        assert (up - dn) / (2 * h) > 0

    def test_pcv_opening_raises_pressure_rate(self, cfg, op):
        from dataclasses import replace
        h = 1e-6
        up, _ = plant.derivatives(replace(op.state, x_pcv=op.state.x_pcv + h), cfg)
        dn, _ = plant.derivatives(replace(op.state, x_pcv=op.state.x_pcv - h), cfg)
        assert (up - dn) / (2 * h) > 0

    def test_lcv_opening_raises_level_rate(self, cfg, op):
        from dataclasses import replace
        h = 1e-6
        _, up = plant.derivatives(replace(op.state, x_lcv=op.state.x_lcv + h), cfg)
        _, dn = plant.derivatives(replace(op.state, x_lcv=op.state.x_lcv - h), cfg)
        assert (up - dn) / (2 * h) > 0


class TestSteadyState:
    def test_matches_bisection_oracle(self, cfg, op):
        # Independent oracle: bisect the molar balance over the PCV opening.
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            r = plant.net_molar_flow(cfg, plant.NORMAL_PRESSURE, plant.NORMAL_LEVEL,
                                     mid, cfg.nominal_feed_pressure)
            if r < 0:
                lo = mid
            else:
                hi = mid
        assert op.pc130_bias == pytest.approx(0.5 * (lo + hi), abs=1e-12)

    def test_openings_strictly_inside_unit_interval(self, op):
        assert 0.0 < op.pc130_bias < 1.0
        assert 0.0 < op.lc130_bias < 1.0

    def test_target_pressure_at_downstream_is_unreachable(self, cfg):
        with pytest.raises(plant.NoSteadyStateError):
            plant.steady_state(cfg, target_pressure=cfg.downstream_pressure)

    def test_doubling_cv_pcv_halves_opening_same_flow(self, cfg, op):
        doubled = plant.PlantConfig.from_dict({**cfg.to_dict(), "cv_pcv": 2 * cfg.cv_pcv})
        op2 = plant.steady_state(doubled)
        assert op2.pc130_bias == pytest.approx(op.pc130_bias / 2, rel=1e-9)
        assert op2.state.fi101_flow == pytest.approx(op.state.fi101_flow, rel=1e-9)


class TestStep:
    def test_fixpoint_over_30_minutes(self, cfg, op):
        pc, lc = make_controllers(op)
        s = op.state
        for _ in range(1800):
            r = plant.step(s, pc, lc, cfg.nominal_feed_pressure, cfg)
            s, pc, lc = r.state, r.pc130, r.lc130
        assert abs(s.pressure - op.state.pressure) < 1e-6
        assert abs(s.level - op.state.level) < 1e-6

    def test_feed_surge_with_frozen_controllers_raises_pressure(self, cfg, op):
        # Frozen controllers: pure-P with zero gain holds the valves at bias.
        pc = PidController(kp=0, ki=0, kd=0, sv=0.784, bias=op.pc130_bias)
        lc = PidController(kp=0, ki=0, kd=0, sv=op.state.level, bias=op.lc130_bias)
        s = op.state
        feed = cfg.nominal_feed_pressure * 1.20
        last = s.pressure
        for _ in range(60):
            r = plant.step(s, pc, lc, feed, cfg)
            s, pc, lc = r.state, r.pc130, r.lc130
            assert s.pressure > last
            last = s.pressure

    def test_dt_zero_is_identity(self, cfg, op):
        pc, lc = make_controllers(op)
        r = plant.step(op.state, pc, lc, cfg.nominal_feed_pressure, cfg, dt=0.0)
        assert r.state == op.state
        assert r.pc130 == pc

    def test_conservation_with_everything_shut(self):
        # No pressure differential on the outlet, level below the
        # vaporization minimum, both feed valves closed: nothing moves.
        cfg = plant.PlantConfig(downstream_pressure=0.784)
        s = plant.PlantState(t=0.0, pressure=0.784, level=0.4, x_pcv=0.0,
                             x_lcv=0.0, feed_pressure=0.9, fi101_flow=0.0)
        pc = PidController(kp=0, ki=0, kd=0, sv=0.784, bias=0.0)
        lc = PidController(kp=0, ki=0, kd=0, sv=0.4, bias=0.0)
        for _ in range(1800):
            r = plant.step(s, pc, lc, 0.9, cfg)
            s, pc, lc = r.state, r.pc130, r.lc130
        assert s.pressure == 0.784
        assert s.level == 0.4

    def test_integration_order_halving_dt(self):
        def endpoint(dt):
            cfg = plant.PlantConfig(integration_dt=dt)
            op = plant.steady_state(cfg)
            pc, lc = make_controllers(op)
            s = op.state
            sc = step_surge(1.20)
            for _ in range(int(1800 / dt)):
                feed = feed_pressure_at(sc, cfg.nominal_feed_pressure, s.t)
                r = plant.step(s, pc, lc, feed, cfg)
                s, pc, lc = r.state, r.pc130, r.lc130
            return s

        a, b = endpoint(1.0), endpoint(0.5)
        assert abs(a.pressure - b.pressure) / abs(a.pressure) < 1e-6
        assert abs(a.level - b.level) / abs(a.level) < 1e-6

    def test_nonfinite_state_raises(self, cfg, op):
        from dataclasses import replace
        pc, lc = make_controllers(op)
        bad = replace(op.state, pressure=math.nan)
        with pytest.raises(plant.NonFiniteStateError):
            plant.step(bad, pc, lc, cfg.nominal_feed_pressure, cfg)


class TestObserve:
    def test_steady_pressure_reading(self, cfg, op):
        pc, _ = make_controllers(op)
        vec = plant.observe(op.state, pc, cfg)
        assert vec.vaporizer_pressure == 0.784

    def test_deterministic(self, cfg, op):
        pc, _ = make_controllers(op)
        assert plant.observe(op.state, pc, cfg) == plant.observe(op.state, pc, cfg)

    def test_sv_passthrough(self, cfg, op):
        from procrl.pid import set_sv
        pc, _ = make_controllers(op)
        vec = plant.observe(op.state, set_sv(pc, 0.80), cfg)
        assert vec.pc130_sv == 0.80

    def test_seven_components_fixed_order(self, cfg, op):
        pc, _ = make_controllers(op)
        vec = plant.observe(op.state, pc, cfg)
        assert len(vec.as_tuple()) == 7
        assert list(vec.as_dict()) == list(plant.SENSOR_FIELDS)


def test_trace_csv_round_trip(tmp_path, op):
    rows = [plant.trace_row(op.state), [1.0, 0.78401, 1.0, 0.5, 0.4, 0.9, 0.357]]
    path = tmp_path / "trace.csv"
    plant.write_trace_csv(path, rows)
    back = plant.read_trace_csv(path)
    assert back == [[float(v) for v in row] for row in rows]
