"""Prompt rendering: quantization, determinism, bin-injectivity."""

import itertools

import pytest

from emojourney import prompt_builder as pb
from emojourney.errors import FileFormatError, OutOfRangeError
from emojourney.knowledge_graph import NEUTRAL_PARAMETERS, MusicalParameters


def params_for_bins(bins, bins_per_param=3):
    # Center of each bin maps back to the same bin index.
    return MusicalParameters.from_iterable((b + 0.5) / bins_per_param for b in bins)


class TestQuantization:
    def test_bin_edges(self):
        assert pb.bin_for(0.0, 3) == 0
        assert pb.bin_for(0.33, 3) == 0
        assert pb.bin_for(0.34, 3) == 1
        assert pb.bin_for(0.5, 3) == 1
        assert pb.bin_for(0.67, 3) == 2

    def test_top_value_folds_into_last_bin(self):
        assert pb.bin_for(1.0, 3) == 2
        assert pb.bin_for(1.0, 5) == 4

    def test_rejects_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            pb.bin_for(1.2, 3)


class TestBuildPrompt:
    def test_default_mid_bins_sentence(self):
        # Composed by hand from the bundled template's mid-bin descriptors.
        assert pb.build_prompt(NEUTRAL_PARAMETERS) == (
            "moderate tempo, balanced mode, neutral timbre, mild harmony, "
            "middle register, moderate density music"
        )

    def test_all_low_bins(self):
        p = MusicalParameters(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        assert pb.build_prompt(p) == (
            "slow tempo, minor mode, dark timbre, dissonant harmony, "
            "low register, sparse density music"
        )

    def test_all_high_bins_at_one(self):
        p = MusicalParameters(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
        assert pb.build_prompt(p) == (
            "fast tempo, major mode, bright timbre, consonant harmony, "
            "high register, dense density music"
        )

    def test_deterministic(self):
        p = MusicalParameters(0.1, 0.9, 0.4, 0.6, 0.2, 0.8)
        assert pb.build_prompt(p) == pb.build_prompt(p)

    def test_same_bin_tuple_same_prompt(self):
        a = MusicalParameters(0.10, 0.5, 0.5, 0.5, 0.5, 0.5)
        b = MusicalParameters(0.25, 0.5, 0.5, 0.5, 0.5, 0.5)
        assert pb.build_prompt(a) == pb.build_prompt(b)

    def test_different_bins_different_prompts(self):
        a = MusicalParameters(0.1, 0.5, 0.5, 0.5, 0.5, 0.5)
        b = MusicalParameters(0.9, 0.5, 0.5, 0.5, 0.5, 0.5)
        assert pb.build_prompt(a) != pb.build_prompt(b)

    def test_exhaustive_bin_injectivity(self):
        template = pb.default_prompt_template()
        prompts = {
            pb.build_prompt(params_for_bins(bins), template)
            for bins in itertools.product(range(3), repeat=6)
        }
        assert len(prompts) == 3**6

    def test_output_non_empty(self):
        assert pb.build_prompt(NEUTRAL_PARAMETERS).strip()


class TestTemplateValidation:
    def test_default_template_shape(self):
        t = pb.default_prompt_template()
        assert t.bins_per_param == 3
        assert len(t.vocabulary) == 18

    def test_missing_descriptor_rejected(self):
        lines = ["bins: 2", "frame: {tempo} {mode} {timbre} {harmony} {register} {density}"]
        for name in ("tempo", "mode", "timbre", "harmony", "register"):
            lines += [f"{name} 0: low {name}", f"{name} 1: high {name}"]
        lines += ["density 0: sparse"]  # density 1 missing
        with pytest.raises(FileFormatError):
            pb.parse_prompt_template("\n".join(lines))

    def test_frame_must_hold_all_six_slots(self):
        lines = ["bins: 2", "frame: {tempo} only"]
        for name in ("tempo", "mode", "timbre", "harmony", "register", "density"):
            lines += [f"{name} 0: low {name}", f"{name} 1: high {name}"]
        with pytest.raises(FileFormatError):
            pb.parse_prompt_template("\n".join(lines))

    def test_bins_below_two_rejected(self):
        with pytest.raises(OutOfRangeError):
            pb.PromptTemplate(bins_per_param=1, vocabulary={}, frame="")

    def test_duplicate_descriptor_rejected(self):
        text = "bins: 2\nframe: x\ntempo 0: slow\ntempo 0: slower\n"
        with pytest.raises(FileFormatError):
            pb.parse_prompt_template(text)

    def test_round_trip(self, tmp_path):
        from emojourney._data import read_default

        path = tmp_path / "template.conf"
        path.write_text(read_default("prompt_template.conf"))
        loaded = pb.load_prompt_template(str(path))
        assert loaded == pb.default_prompt_template()
