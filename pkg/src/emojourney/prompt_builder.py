"""Deterministic text prompts from musical parameters.

Each parameter is quantized into a small number of bins and the per-bin
descriptors are substituted into a fixed sentence frame, so equal bin
tuples give byte-identical prompts and distinct bin tuples never collide.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from ._data import read_default
from .errors import FileFormatError, OutOfRangeError
from .knowledge_graph import PARAMETER_NAMES, MusicalParameters

DEFAULT_BINS = 3


@dataclass(frozen=True)
class PromptTemplate:
    """Sentence frame with one slot per parameter plus per-bin descriptors."""

    bins_per_param: int
    vocabulary: Mapping[tuple[str, int], str]
    frame: str

    def __post_init__(self) -> None:
        if self.bins_per_param < 2:
            raise OutOfRangeError("bins_per_param must be >= 2")
        expected = {
            (name, b) for name in PARAMETER_NAMES for b in range(self.bins_per_param)
        }
        keys = set(self.vocabulary.keys())
        if keys != expected:
            missing = sorted(expected - keys)
            extra = sorted(keys - expected)
            raise FileFormatError(
                f"vocabulary mismatch: missing={missing[:3]} extra={extra[:3]}"
            )
        if any(not v.strip() for v in self.vocabulary.values()):
            raise FileFormatError("descriptors must be non-empty")
        slots = [
            field for _, field, _, _ in string.Formatter().parse(self.frame)
            if field is not None
        ]
        if sorted(slots) != sorted(PARAMETER_NAMES):
            raise FileFormatError(
                f"frame must contain each parameter slot exactly once, got {slots}"
            )
        object.__setattr__(self, "vocabulary", dict(self.vocabulary))


def bin_for(value: float, bins: int) -> int:
    """Half-open quantization with the top value folded into the last bin."""
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise OutOfRangeError(f"value={value} outside [0, 1]")
    return min(int(math.floor(value * bins)), bins - 1)


def build_prompt(p: MusicalParameters, template: PromptTemplate | None = None) -> str:
    """Render the parameter state as a descriptive query sentence."""
    t = default_prompt_template() if template is None else template
    slots = {
        name: t.vocabulary[(name, bin_for(value, t.bins_per_param))]
        for name, value in zip(PARAMETER_NAMES, p.as_tuple())
    }
    return t.frame.format(**slots)


def parse_prompt_template(text: str) -> PromptTemplate:
    """Parse `key: value` lines: `bins`, `frame`, and `<param> <bin>` entries."""
    bins: int | None = None
    frame: str | None = None
    vocabulary: dict[tuple[str, int], str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise FileFormatError(f"template line {lineno}: expected `key: value`")
        key = key.strip()
        value = value.strip()
        if key == "bins":
            try:
                bins = int(value)
            except ValueError as exc:
                raise FileFormatError(f"template line {lineno}: bad bin count") from exc
        elif key == "frame":
            frame = value
        else:
            parts = key.split()
            if len(parts) != 2 or parts[0] not in PARAMETER_NAMES:
                raise FileFormatError(f"template line {lineno}: unknown key {key!r}")
            try:
                b = int(parts[1])
            except ValueError as exc:
                raise FileFormatError(f"template line {lineno}: bad bin index") from exc
            if (parts[0], b) in vocabulary:
                raise FileFormatError(f"template line {lineno}: duplicate descriptor")
            vocabulary[(parts[0], b)] = value
    if bins is None or frame is None:
        raise FileFormatError("template needs both `bins` and `frame` entries")
    return PromptTemplate(bins_per_param=bins, vocabulary=vocabulary, frame=frame)


def load_prompt_template(path: str) -> PromptTemplate:
    with open(path, encoding="utf-8") as fh:
        return parse_prompt_template(fh.read())


@lru_cache(maxsize=1)
def default_prompt_template() -> PromptTemplate:
    return parse_prompt_template(read_default("prompt_template.conf"))
