"""Two-tier mapping from emotion vectors to six musical parameters.

Tier 1 fires an expert rule when a single emotion score strictly exceeds
its high-intensity threshold. Otherwise tier 2 blends the whole vector
through a 27x6 weight matrix and squashes each output with the logistic
function, so complex emotional mixtures still land in (0, 1) per parameter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Mapping

import numpy as np

from ._data import read_default
from .emotion_core import NUM_EMOTIONS, EmotionVector, label_index, label_name
from .errors import FileFormatError, OutOfRangeError

PARAMETER_NAMES: tuple[str, ...] = (
    "tempo",
    "mode",
    "timbre",
    "harmony",
    "register",
    "density",
)

NUM_PARAMETERS = len(PARAMETER_NAMES)

# Default high-intensity threshold for tier-1 rules.
DEFAULT_THRESHOLD = 0.7

TIER_RULE = "tier1"
TIER_BLEND = "tier2"

BPM_MIN = 60.0
BPM_MAX = 120.0


@dataclass(frozen=True)
class MusicalParameters:
    """Six values in [0, 1] with semantic poles.

    tempo: slow..fast (rendered 60..120 BPM), mode: minor..major,
    timbre: dark..bright, harmony: dissonant..consonant,
    register: low..high, density: sparse..dense.
    """

    tempo: float
    mode: float
    timbre: float
    harmony: float
    register: float
    density: float

    def __post_init__(self) -> None:
        for name, value in zip(PARAMETER_NAMES, self.as_tuple()):
            if not isinstance(value, float) or not math.isfinite(value):
                raise OutOfRangeError(f"{name} is not a finite number: {value!r}")
            if not 0.0 <= value <= 1.0:
                raise OutOfRangeError(f"{name}={value} outside [0, 1]")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.tempo, self.mode, self.timbre, self.harmony, self.register, self.density)

    @classmethod
    def from_iterable(cls, values) -> "MusicalParameters":
        items = tuple(float(v) for v in values)
        if len(items) != NUM_PARAMETERS:
            raise OutOfRangeError(f"expected {NUM_PARAMETERS} values, got {len(items)}")
        return cls(*items)

    @property
    def bpm(self) -> float:
        """Tempo rendered as beats per minute on the 60..120 scale."""
        return BPM_MIN + (BPM_MAX - BPM_MIN) * self.tempo

    def replace(self, **updates: float) -> "MusicalParameters":
        return replace(self, **updates)


NEUTRAL_PARAMETERS = MusicalParameters(0.5, 0.5, 0.5, 0.5, 0.5, 0.5)


@dataclass(frozen=True)
class Rule:
    """IF score(emotion_index) > threshold THEN set the listed parameters."""

    emotion_index: int
    assignments: Mapping[str, float]
    threshold: float = DEFAULT_THRESHOLD
    priority: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.emotion_index < NUM_EMOTIONS:
            raise OutOfRangeError(f"emotion_index out of range: {self.emotion_index}")
        if not math.isfinite(self.threshold) or not 0.0 < self.threshold <= 1.0:
            raise OutOfRangeError(f"threshold={self.threshold} outside (0, 1]")
        for name, value in self.assignments.items():
            if name not in PARAMETER_NAMES:
                raise OutOfRangeError(f"unknown parameter in rule: {name!r}")
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise OutOfRangeError(f"rule value {name}={value} outside [0, 1]")
        object.__setattr__(self, "assignments", dict(self.assignments))

    @property
    def emotion_name(self) -> str:
        return label_name(self.emotion_index)


@dataclass(frozen=True)
class RuleSet:
    """Validated collection of rules with unique priorities."""

    rules: tuple[Rule, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        priorities = [r.priority for r in self.rules]
        if len(set(priorities)) != len(priorities):
            raise OutOfRangeError("rule priorities must be unique within a rule set")
        object.__setattr__(self, "rules", tuple(self.rules))

    def __len__(self) -> int:
        return len(self.rules)

    def for_emotion(self, name: str) -> tuple[Rule, ...]:
        index = label_index(name)
        return tuple(r for r in self.rules if r.emotion_index == index)


@dataclass(frozen=True)
class WeightMatrix:
    """27x6 projection weights, each in [-1, 1]; rows follow the label order."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (NUM_EMOTIONS, NUM_PARAMETERS):
            raise OutOfRangeError(
                f"weight matrix must be {NUM_EMOTIONS}x{NUM_PARAMETERS}, got {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise OutOfRangeError("weight matrix contains non-finite entries")
        if np.any(w < -1.0) or np.any(w > 1.0):
            raise OutOfRangeError("weight matrix entries must lie in [-1, 1]")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def match_rule(e: EmotionVector, rules: RuleSet) -> Rule | None:
    """Return the fired rule with the highest emotion score, or None.

    A rule fires when its emotion score strictly exceeds its threshold.
    Ties break by lowest emotion index, then lowest priority, so the
    outcome is deterministic even for duplicate-emotion rule sets.
    """
    best_key: tuple[float, int, int] | None = None
    winner: Rule | None = None
    for rule in rules.rules:
        score = e.scores[rule.emotion_index]
        if score > rule.threshold:
            key = (-score, rule.emotion_index, rule.priority)
            if best_key is None or key < best_key:
                best_key, winner = key, rule
    return winner


def apply_rule(rule: Rule, defaults: MusicalParameters) -> MusicalParameters:
    """Overwrite exactly the parameters named by the rule; keep the rest."""
    if not rule.assignments:
        return defaults
    return defaults.replace(**rule.assignments)


def blend_parameters(e: EmotionVector, weights: WeightMatrix) -> MusicalParameters:
    """Project the vector through the weight matrix and squash elementwise.

    p_j = logistic((e W)_j). With scores in [0, 1] and weights in [-1, 1]
    the pre-activation stays within +-27, so outputs never saturate to
    exactly 0 or 1 in double precision.
    """
    z = np.asarray(e.scores, dtype=np.float64) @ weights.weights
    p = 1.0 / (1.0 + np.exp(-z))
    return MusicalParameters.from_iterable(p)


def infer_parameters(
    e: EmotionVector,
    rules: RuleSet,
    weights: WeightMatrix,
    defaults: MusicalParameters = NEUTRAL_PARAMETERS,
) -> tuple[MusicalParameters, str]:
    """Two-tier inference: fired rule wins, otherwise weighted blending."""
    rule = match_rule(e, rules)
    if rule is not None:
        return apply_rule(rule, defaults), TIER_RULE
    return blend_parameters(e, weights), TIER_BLEND


def parse_rules(text: str) -> RuleSet:
    """Parse the JSON rule file: a list of {emotion, threshold, set, priority}."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"rule file is not valid JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise FileFormatError("rule file must contain a JSON list")
    rules = []
    for i, item in enumerate(payload):
        if not isinstance(item, dict):
            raise FileFormatError(f"rule {i}: expected an object")
        try:
            emotion = item["emotion"]
            assignments = item["set"]
        except KeyError as exc:
            raise FileFormatError(f"rule {i}: missing key {exc}") from exc
        if not isinstance(assignments, dict):
            raise FileFormatError(f"rule {i}: 'set' must be an object")
        rules.append(
            Rule(
                emotion_index=label_index(emotion),
                assignments={k: float(v) for k, v in assignments.items()},
                threshold=float(item.get("threshold", DEFAULT_THRESHOLD)),
                priority=int(item.get("priority", i)),
            )
        )
    return RuleSet(tuple(rules))


def load_rules(path: str) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read())


@lru_cache(maxsize=1)
def default_rules() -> RuleSet:
    return parse_rules(read_default("rules.json"))


def parse_weight_matrix(text: str) -> WeightMatrix:
    """Parse 27 whitespace-separated rows of 6 decimals; `#` starts a comment."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = line.split()
        if len(cells) != NUM_PARAMETERS:
            raise FileFormatError(
                f"weight matrix line {lineno}: expected {NUM_PARAMETERS} columns"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise FileFormatError(f"weight matrix line {lineno}: bad number") from exc
    if len(rows) != NUM_EMOTIONS:
        raise FileFormatError(f"weight matrix must have {NUM_EMOTIONS} rows, got {len(rows)}")
    return WeightMatrix(np.asarray(rows))


def load_weight_matrix(path: str) -> WeightMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_weight_matrix(fh.read())


@lru_cache(maxsize=1)
def default_weight_matrix() -> WeightMatrix:
    return parse_weight_matrix(read_default("weight_matrix.tsv"))
