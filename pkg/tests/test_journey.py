"""Journey planning: guide betweenness, exact endpoints, preset loading."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from emojourney import journey as jn
from emojourney.errors import FileFormatError, OutOfRangeError
from emojourney.knowledge_graph import NEUTRAL_PARAMETERS, MusicalParameters

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
params_st = st.builds(MusicalParameters, unit, unit, unit, unit, unit, unit)


class TestPlanJourney:
    def test_fixed_point(self):
        target = jn.TargetPreset(NEUTRAL_PARAMETERS)
        for blend in (0.0, 0.3, 1.0):
            result = jn.plan_journey(NEUTRAL_PARAMETERS, target, blend)
            assert result.stages == (NEUTRAL_PARAMETERS,) * 3

    def test_midpoint_tempo(self):
        match = MusicalParameters(1.0, 0.5, 0.5, 0.5, 0.5, 0.5)
        target = jn.TargetPreset(MusicalParameters(0.0, 0.5, 0.5, 0.5, 0.5, 0.5))
        result = jn.plan_journey(match, target, 0.5)
        assert result.guide.tempo == 0.5

    def test_componentwise_average_against_hand_arithmetic(self):
        match = MusicalParameters(0.9, 0.2, 0.3, 0.2, 0.4, 0.8)
        target = jn.default_target_preset()
        assert target.params.as_tuple() == (0.1, 0.7, 0.4, 0.9, 0.4, 0.2)
        result = jn.plan_journey(match, target, 0.5)
        expected = (0.5, 0.45, 0.35, 0.55, 0.4, 0.5)
        assert result.guide.as_tuple() == pytest.approx(expected, abs=1e-12)
        assert result.match == match
        assert result.target == target.params

    def test_blend_zero_is_exact_match(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            match = MusicalParameters.from_iterable(rng.uniform(0, 1, 6))
            target = jn.TargetPreset(MusicalParameters.from_iterable(rng.uniform(0, 1, 6)))
            assert jn.plan_journey(match, target, 0.0).guide == match

    def test_blend_one_is_exact_target(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            match = MusicalParameters.from_iterable(rng.uniform(0, 1, 6))
            target = jn.TargetPreset(MusicalParameters.from_iterable(rng.uniform(0, 1, 6)))
            assert jn.plan_journey(match, target, 1.0).guide == target.params

    @given(params_st, params_st, unit)
    def test_guide_between_endpoints(self, match, goal, blend):
        result = jn.plan_journey(match, jn.TargetPreset(goal), blend)
        for a, g, c in zip(match.as_tuple(), result.guide.as_tuple(), goal.as_tuple()):
            assert min(a, c) <= g <= max(a, c)

    def test_blend_out_of_range(self):
        target = jn.TargetPreset(NEUTRAL_PARAMETERS)
        with pytest.raises(OutOfRangeError):
            jn.plan_journey(NEUTRAL_PARAMETERS, target, 1.5)
        with pytest.raises(OutOfRangeError):
            jn.plan_journey(NEUTRAL_PARAMETERS, target, -0.1)

    def test_default_stage_duration(self):
        result = jn.plan_journey(NEUTRAL_PARAMETERS, jn.TargetPreset(NEUTRAL_PARAMETERS))
        assert result.stage_duration_s == 180.0


class TestJourneyInvariants:
    def test_exactly_three_stages(self):
        with pytest.raises(OutOfRangeError):
            jn.Journey((NEUTRAL_PARAMETERS, NEUTRAL_PARAMETERS))  # type: ignore[arg-type]

    def test_guide_outside_interval_rejected(self):
        low = MusicalParameters(0.2, 0.5, 0.5, 0.5, 0.5, 0.5)
        high = MusicalParameters(0.4, 0.5, 0.5, 0.5, 0.5, 0.5)
        outside = MusicalParameters(0.9, 0.5, 0.5, 0.5, 0.5, 0.5)
        with pytest.raises(OutOfRangeError):
            jn.Journey((low, outside, high))

    def test_positive_duration_required(self):
        with pytest.raises(OutOfRangeError):
            jn.Journey((NEUTRAL_PARAMETERS,) * 3, stage_duration_s=0.0)

    def test_stage_accessors(self):
        match = MusicalParameters(0.8, 0.5, 0.5, 0.5, 0.5, 0.5)
        result = jn.plan_journey(match, jn.TargetPreset(NEUTRAL_PARAMETERS), 0.5)
        assert result.match == result.stages[0]
        assert result.guide == result.stages[1]
        assert result.target == result.stages[2]


class TestTargetPresetLoading:
    def test_default_preset_is_calm(self):
        params = jn.default_target_preset().params
        assert params.tempo <= 0.2
        assert params.harmony >= 0.8
        assert params.density <= 0.3

    def test_missing_parameter_rejected(self):
        with pytest.raises(FileFormatError):
            jn.parse_target_preset("tempo\t0.1\nmode\t0.7\n")

    def test_unknown_parameter_rejected(self):
        with pytest.raises(FileFormatError):
            jn.parse_target_preset("loudness\t0.5\n")

    def test_out_of_range_rejected(self):
        text = "\n".join(
            f"{name}\t{value}"
            for name, value in zip(
                ("tempo", "mode", "timbre", "harmony", "register", "density"),
                (1.4, 0.5, 0.5, 0.5, 0.5, 0.5),
            )
        )
        with pytest.raises(OutOfRangeError):
            jn.parse_target_preset(text)

    def test_round_trip(self, tmp_path):
        path = tmp_path / "preset.tsv"
        lines = [
            f"{name}\t{value}"
            for name, value in zip(
                ("tempo", "mode", "timbre", "harmony", "register", "density"),
                (0.2, 0.6, 0.4, 0.8, 0.3, 0.1),
            )
        ]
        path.write_text("\n".join(lines))
        preset = jn.load_target_preset(str(path))
        assert preset.params.as_tuple() == (0.2, 0.6, 0.4, 0.8, 0.3, 0.1)
