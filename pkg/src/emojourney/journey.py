"""Three-stage journey planning: match the current state, then guide toward calm.

The guide stage is a componentwise linear interpolation between the match
parameters and the configured calm target, clamped into the closed interval
they span so the betweenness invariant holds exactly under floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from ._data import read_default
from .errors import FileFormatError, OutOfRangeError
from .knowledge_graph import PARAMETER_NAMES, MusicalParameters

STAGE_ROLES: tuple[str, ...] = ("match", "guide", "target")

DEFAULT_STAGE_DURATION_S = 180.0
DEFAULT_BLEND = 0.5


@dataclass(frozen=True)
class TargetPreset:
    """The calm end state a journey steers toward."""

    params: MusicalParameters


@dataclass(frozen=True)
class Journey:
    """Ordered (match, guide, target) parameter stages of equal duration."""

    stages: tuple[MusicalParameters, MusicalParameters, MusicalParameters]
    stage_duration_s: float = DEFAULT_STAGE_DURATION_S

    def __post_init__(self) -> None:
        if len(self.stages) != 3:
            raise OutOfRangeError(f"a journey has exactly 3 stages, got {len(self.stages)}")
        if not math.isfinite(self.stage_duration_s) or self.stage_duration_s <= 0:
            raise OutOfRangeError(f"stage duration must be positive: {self.stage_duration_s}")
        first, guide, last = (s.as_tuple() for s in self.stages)
        for name, a, b, c in zip(PARAMETER_NAMES, first, guide, last):
            if not min(a, c) <= b <= max(a, c):
                raise OutOfRangeError(
                    f"guide {name}={b} outside the interval spanned by {a} and {c}"
                )

    @property
    def match(self) -> MusicalParameters:
        return self.stages[0]

    @property
    def guide(self) -> MusicalParameters:
        return self.stages[1]

    @property
    def target(self) -> MusicalParameters:
        return self.stages[2]


def plan_journey(
    match: MusicalParameters,
    target: TargetPreset,
    blend: float = DEFAULT_BLEND,
    stage_duration_s: float = DEFAULT_STAGE_DURATION_S,
) -> Journey:
    """Expand one parameter state into the (match, guide, target) sequence.

    blend=0 leaves the guide at the match state, blend=1 moves it all the
    way to the target; both endpoints are exact.
    """
    if not math.isfinite(blend) or not 0.0 <= blend <= 1.0:
        raise OutOfRangeError(f"blend={blend} outside [0, 1]")
    goal = target.params
    guide = []
    for a, c in zip(match.as_tuple(), goal.as_tuple()):
        g = (1.0 - blend) * a + blend * c
        lo, hi = (a, c) if a <= c else (c, a)
        guide.append(min(max(g, lo), hi))
    return Journey(
        (match, MusicalParameters.from_iterable(guide), goal),
        stage_duration_s=stage_duration_s,
    )


def parse_target_preset(text: str) -> TargetPreset:
    """Parse `param<TAB>value` lines covering all six parameters."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FileFormatError(f"target preset line {lineno}: expected param<TAB>value")
        name = parts[0].strip()
        if name not in PARAMETER_NAMES:
            raise FileFormatError(f"target preset line {lineno}: unknown parameter {name!r}")
        if name in values:
            raise FileFormatError(f"target preset line {lineno}: duplicate {name!r}")
        try:
            values[name] = float(parts[1])
        except ValueError as exc:
            raise FileFormatError(f"target preset line {lineno}: bad number") from exc
    missing = [n for n in PARAMETER_NAMES if n not in values]
    if missing:
        raise FileFormatError(f"target preset missing parameters: {', '.join(missing)}")
    return TargetPreset(MusicalParameters(**values))


def load_target_preset(path: str) -> TargetPreset:
    with open(path, encoding="utf-8") as fh:
        return parse_target_preset(fh.read())


@lru_cache(maxsize=1)
def default_target_preset() -> TargetPreset:
    return parse_target_preset(read_default("target_preset.tsv"))
