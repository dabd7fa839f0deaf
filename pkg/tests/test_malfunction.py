import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from procrl.malfunction import (RAMP, STEP, MalfunctionScenario, ScenarioError,
                                feed_pressure_at, null_scenario, sample_scenario,
                                step_surge)


class TestProfiles:
    def test_step_surge_after_onset(self):
        s = step_surge(1.20)
        assert feed_pressure_at(s, 0.90, 600.0) == pytest.approx(1.08, abs=1e-12)

    def test_ramp_midpoint(self):
        s = MalfunctionScenario(kind=RAMP, magnitude=1.20, t_complete=1200.0)
        assert feed_pressure_at(s, 0.90, 600.0) == pytest.approx(0.9 * 1.10, abs=1e-12)

    def test_before_onset_is_nominal(self):
        s = MalfunctionScenario(kind=RAMP, magnitude=1.20, t_complete=600.0, onset=100.0)
        assert feed_pressure_at(s, 0.90, 50.0) == 0.90

    def test_null_scenario_is_exactly_nominal(self):
        s = null_scenario()
        for t in (0.0, 1.0, 1800.0):
            assert feed_pressure_at(s, 0.90, t) == 0.90

    def test_ramp_holds_after_completion(self):
        s = MalfunctionScenario(kind=RAMP, magnitude=1.10, t_complete=300.0)
        assert feed_pressure_at(s, 0.90, 300.0) == feed_pressure_at(s, 0.90, 1800.0)

    @settings(max_examples=200, deadline=None)
    @given(magnitude=st.floats(min_value=0.90, max_value=1.20),
           t_complete=st.floats(min_value=0.0, max_value=1800.0),
           times=st.lists(st.floats(min_value=0.0, max_value=5400.0), min_size=2, max_size=10))
    def test_monotone_in_time(self, magnitude, t_complete, times):
        s = MalfunctionScenario(kind=RAMP, magnitude=magnitude, t_complete=t_complete)
        times = sorted(times)
        values = [feed_pressure_at(s, 0.90, t) for t in times]
        if magnitude >= 1.0:
            assert all(b >= a for a, b in zip(values, values[1:]))
        else:
            assert all(b <= a for a, b in zip(values, values[1:]))

    @settings(max_examples=100, deadline=None)
    @given(magnitude=st.floats(min_value=0.90, max_value=1.20),
           t=st.floats(min_value=0.0, max_value=3600.0))
    def test_zero_length_ramp_equals_step(self, magnitude, t):
        ramp = MalfunctionScenario(kind=RAMP, magnitude=magnitude, t_complete=0.0)
        step = MalfunctionScenario(kind=STEP, magnitude=magnitude)
        assert feed_pressure_at(ramp, 0.90, t) == feed_pressure_at(step, 0.90, t)


class TestValidation:
    def test_magnitude_out_of_range(self):
        with pytest.raises(ScenarioError):
            MalfunctionScenario(kind=STEP, magnitude=1.30)

    def test_step_with_ramp_duration(self):
        with pytest.raises(ScenarioError):
            MalfunctionScenario(kind=STEP, magnitude=1.1, t_complete=60.0)

    def test_unknown_kind(self):
        with pytest.raises(ScenarioError):
            MalfunctionScenario(kind="spike", magnitude=1.1)


class TestSampling:
    def test_values_within_ranges(self):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            s = sample_scenario(rng)
            assert 0.90 <= s.magnitude <= 1.20
            assert 0.0 <= s.t_complete <= 1800.0
            assert 0.0 <= s.t_procedure_start <= 3600.0

    def test_same_seed_same_scenario(self):
        assert sample_scenario(123) == sample_scenario(123)

    def test_uniform_mean_of_magnitude(self):
        rng = np.random.default_rng(11)
        draws = [sample_scenario(rng).magnitude for _ in range(10_000)]
        assert np.mean(draws) == pytest.approx(1.05, abs=0.01)


def test_json_round_trip(tmp_path):
    s = MalfunctionScenario(kind=RAMP, magnitude=1.17, t_complete=432.1,
                            t_procedure_start=1000.5)
    path = tmp_path / "scenario.json"
    s.save(path)
    assert MalfunctionScenario.load(path) == s
