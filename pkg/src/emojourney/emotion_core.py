"""Fine-grained emotion vectors over a fixed 27-label taxonomy.

Holds the canonical label order and vector validation, the coarse-to-fine
label mapping used when aligning coarser corpora, the focal-loss numerics
with their analytic gradient, and two text scorers: a bundled keyword
lexicon baseline and an adapter for an external classifier service.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import httpx

from ._data import read_default
from .errors import (
    EmptyInputError,
    FileFormatError,
    MalformedPayloadError,
    OutOfRangeError,
    RemoteTimeoutError,
    UnknownLabelError,
)
from .textutil import tokenize

EMOTION_LABELS: tuple[str, ...] = (
    "admiration",
    "amusement",
    "anger",
    "annoyance",
    "approval",
    "caring",
    "confusion",
    "curiosity",
    "desire",
    "disappointment",
    "disapproval",
    "disgust",
    "embarrassment",
    "excitement",
    "fear",
    "gratitude",
    "grief",
    "joy",
    "love",
    "nervousness",
    "optimism",
    "pride",
    "realization",
    "relief",
    "remorse",
    "sadness",
    "surprise",
)

NUM_EMOTIONS = len(EMOTION_LABELS)

_LABEL_TO_INDEX: dict[str, int] = {name: i for i, name in enumerate(EMOTION_LABELS)}

# Clamp floor applied before the logarithm in the focal loss.
LOG_EPS = 1e-12

# Keyword lexicon: token -> ((label index, weight), ...)
Lexicon = Mapping[str, tuple[tuple[int, float], ...]]
# Coarse label -> activated fine-grained label indices.
CoarseMap = Mapping[str, tuple[int, ...]]


@dataclass(frozen=True)
class EmotionLabel:
    """One taxonomy entry; `id` is its position in the canonical order."""

    id: int
    name: str


LABELS: tuple[EmotionLabel, ...] = tuple(
    EmotionLabel(i, name) for i, name in enumerate(EMOTION_LABELS)
)


def label_index(name: str) -> int:
    """Map a canonical label name to its index; raises UnknownLabelError."""
    try:
        return _LABEL_TO_INDEX[name]
    except KeyError:
        raise UnknownLabelError(f"unknown emotion label: {name!r}") from None


def label_name(index: int) -> str:
    """Map an index 0..26 back to its canonical label name."""
    if not 0 <= index < NUM_EMOTIONS:
        raise UnknownLabelError(f"emotion index out of range: {index}")
    return EMOTION_LABELS[index]


@dataclass(frozen=True)
class EmotionVector:
    """27 per-label probabilities in [0, 1]; not normalized to sum 1."""

    scores: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.scores) != NUM_EMOTIONS:
            raise OutOfRangeError(
                f"expected {NUM_EMOTIONS} scores, got {len(self.scores)}"
            )
        for i, value in enumerate(self.scores):
            if not isinstance(value, float) or not math.isfinite(value):
                raise OutOfRangeError(f"score[{i}] is not a finite number: {value!r}")
            if not 0.0 <= value <= 1.0:
                raise OutOfRangeError(f"score[{i}]={value} outside [0, 1]")

    @classmethod
    def zeros(cls) -> "EmotionVector":
        return cls((0.0,) * NUM_EMOTIONS)

    def score(self, label: str) -> float:
        return self.scores[label_index(label)]

    def argmax(self) -> int:
        best = 0
        for i, value in enumerate(self.scores):
            if value > self.scores[best]:
                best = i
        return best


def validate_vector(raw: Sequence[float]) -> EmotionVector:
    """Validate 27 raw scores into an EmotionVector without renormalizing."""
    try:
        scores = tuple(float(v) for v in raw)
    except (TypeError, ValueError) as exc:
        raise OutOfRangeError(f"scores must be numbers: {exc}") from exc
    return EmotionVector(scores)


@dataclass(frozen=True)
class MultiHotTarget:
    """Multi-label training target; one bit per fine-grained label."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) != NUM_EMOTIONS:
            raise OutOfRangeError(f"expected {NUM_EMOTIONS} bits, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise OutOfRangeError("bits must be 0 or 1")
        if not any(self.bits):
            raise OutOfRangeError("a mapped target must activate at least one label")

    def active_labels(self) -> tuple[str, ...]:
        return tuple(EMOTION_LABELS[i] for i, b in enumerate(self.bits) if b)


@dataclass(frozen=True)
class FocalLossParams:
    """Per-class weight alpha in (0, 1] and focusing exponent gamma >= 0."""

    alpha: float
    gamma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha) or not 0.0 < self.alpha <= 1.0:
            raise OutOfRangeError(f"alpha={self.alpha} outside (0, 1]")
        if not math.isfinite(self.gamma) or self.gamma < 0.0:
            raise OutOfRangeError(f"gamma={self.gamma} must be >= 0")


def focal_loss(p_t: float, params: FocalLossParams) -> float:
    """-alpha * (1 - p_t)^gamma * log(p_t), with p_t clamped to [1e-12, 1]."""
    if not math.isfinite(p_t):
        raise OutOfRangeError(f"p_t is not finite: {p_t!r}")
    p = min(max(float(p_t), LOG_EPS), 1.0)
    if p == 1.0:
        return 0.0
    return -params.alpha * (1.0 - p) ** params.gamma * math.log(p)


def focal_loss_grad(p_t: float, params: FocalLossParams) -> float:
    """Analytic d/dp_t of focal_loss at the clamped p_t."""
    if not math.isfinite(p_t):
        raise OutOfRangeError(f"p_t is not finite: {p_t!r}")
    p = min(max(float(p_t), LOG_EPS), 1.0)
    alpha, gamma = params.alpha, params.gamma
    if gamma == 0.0:
        return -alpha / p
    if p == 1.0:
        return 0.0
    rest = 1.0 - p
    term = -gamma * rest ** (gamma - 1.0) * math.log(p) + rest**gamma / p
    return -alpha * term


def parse_lexicon(text: str) -> Lexicon:
    """Parse `keyword<TAB>label<TAB>weight` lines; `#` starts a comment."""
    entries: dict[str, list[tuple[int, float]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FileFormatError(
                f"lexicon line {lineno}: expected keyword<TAB>label<TAB>weight"
            )
        keyword = parts[0].strip().lower()
        if not keyword:
            raise FileFormatError(f"lexicon line {lineno}: empty keyword")
        index = label_index(parts[1].strip())
        try:
            weight = float(parts[2])
        except ValueError as exc:
            raise FileFormatError(f"lexicon line {lineno}: bad weight") from exc
        if not 0.0 < weight <= 10.0:
            raise FileFormatError(
                f"lexicon line {lineno}: weight {weight} outside (0, 10]"
            )
        entries.setdefault(keyword, []).append((index, weight))
    return {k: tuple(v) for k, v in entries.items()}


def load_lexicon(path: str) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh.read())


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    return parse_lexicon(read_default("lexicon.tsv"))


def parse_coarse_map(text: str) -> CoarseMap:
    """Parse `coarse<TAB>fine1,fine2,...` lines into the mapping table."""
    table: dict[str, tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FileFormatError(
                f"coarse map line {lineno}: expected coarse<TAB>fine1,fine2,..."
            )
        coarse = parts[0].strip().lower()
        fine = tuple(label_index(name.strip()) for name in parts[1].split(",") if name.strip())
        if not coarse or not fine:
            raise FileFormatError(f"coarse map line {lineno}: empty entry")
        if coarse in table:
            raise FileFormatError(f"coarse map line {lineno}: duplicate {coarse!r}")
        table[coarse] = fine
    return table


def load_coarse_map(path: str) -> CoarseMap:
    with open(path, encoding="utf-8") as fh:
        return parse_coarse_map(fh.read())


@lru_cache(maxsize=1)
def default_coarse_map() -> CoarseMap:
    return parse_coarse_map(read_default("coarse_map.tsv"))


def map_coarse_to_fine(coarse_label: str, mapping: CoarseMap | None = None) -> MultiHotTarget:
    """Expand a coarse label into its configured multi-hot fine-grained target."""
    table = default_coarse_map() if mapping is None else mapping
    key = coarse_label.strip().lower()
    if key not in table:
        raise UnknownLabelError(f"unknown coarse label: {coarse_label!r}")
    bits = [0] * NUM_EMOTIONS
    for index in table[key]:
        bits[index] = 1
    return MultiHotTarget(tuple(bits))


def lexicon_score(text: str, lexicon: Lexicon | None = None) -> EmotionVector:
    """Deterministic keyword-evidence scorer.

    Accumulates per-label weights over matched tokens and squashes each
    total s to s / (1 + s), so scores stay in [0, 1) and grow monotonically
    with evidence. Text without any lexicon hit yields the all-zero vector.
    """
    if not text or not text.strip():
        raise EmptyInputError("text is empty")
    lex = default_lexicon() if lexicon is None else lexicon
    totals = [0.0] * NUM_EMOTIONS
    for token in tokenize(text):
        for index, weight in lex.get(token, ()):
            totals[index] += weight
    return EmotionVector(tuple(s / (1.0 + s) for s in totals))


def external_score(text: str, endpoint: str, timeout_ms: float = 2000.0) -> EmotionVector:
    """Score text via a remote classifier service.

    Wire contract: POST {"text": ...} to `endpoint`, expect 200 with
    {"scores": [27 numbers]}. Unreachable or slow service raises
    RemoteTimeoutError; contract violations raise MalformedPayloadError;
    out-of-range scores raise OutOfRangeError. No state is shared between
    calls, so concurrent use is safe.
    """
    if not text or not text.strip():
        raise EmptyInputError("text is empty")
    try:
        response = httpx.post(endpoint, json={"text": text}, timeout=timeout_ms / 1000.0)
    except httpx.TransportError as exc:
        raise RemoteTimeoutError(f"scorer at {endpoint} unreachable: {exc}") from exc
    if response.status_code != 200:
        raise MalformedPayloadError(f"scorer returned HTTP {response.status_code}")
    try:
        payload = response.json()
    except ValueError as exc:
        raise MalformedPayloadError("scorer response is not JSON") from exc
    if not isinstance(payload, dict) or "scores" not in payload:
        raise MalformedPayloadError('scorer response missing "scores"')
    scores = payload["scores"]
    if not isinstance(scores, list) or len(scores) != NUM_EMOTIONS:
        raise MalformedPayloadError(
            f"expected {NUM_EMOTIONS} scores, got {len(scores) if isinstance(scores, list) else type(scores).__name__}"
        )
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in scores):
        raise MalformedPayloadError("scores must all be numbers")
    return validate_vector(scores)
