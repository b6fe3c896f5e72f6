"""HTTP session service: text in, a three-stage audiovisual plan out.

The pipeline runs text -> emotion -> musical parameters -> journey ->
per-stage prompt -> embedding -> top-k clip search. Feedback lives only in
an in-memory ring buffer: no request path writes anything durable, and a
process restart starts from an empty buffer.
"""

from __future__ import annotations

import math
import os
import threading
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from .emotion_core import (
    EmotionVector,
    Lexicon,
    default_lexicon,
    external_score,
    lexicon_score,
)
from .errors import (
    DegenerateDataError,
    MalformedPayloadError,
    OutOfRangeError,
    RemoteTimeoutError,
)
from .journey import (
    DEFAULT_BLEND,
    STAGE_ROLES,
    Journey,
    TargetPreset,
    default_target_preset,
    load_target_preset,
    plan_journey,
)
from .knowledge_graph import (
    NEUTRAL_PARAMETERS,
    MusicalParameters,
    RuleSet,
    WeightMatrix,
    default_rules,
    default_weight_matrix,
    infer_parameters,
    load_rules,
    load_weight_matrix,
)
from .prompt_builder import PromptTemplate, build_prompt, default_prompt_template
from .retrieval_index import (
    DEFAULT_DIM,
    HashingTextEncoder,
    IvfIndex,
    RemoteTextEncoder,
    SearchResult,
    TextEncoder,
    default_nprobe,
    load_index,
    search,
)
from .stats import one_sample_t, pearson_r

NEUTRAL_MIDPOINT = 3.0
MAX_TEXT_CHARS = 2000
DEFAULT_TOP_K = 3
DEFAULT_FEEDBACK_CAPACITY = 10000

FEEDBACK_MEASURES = ("mood_impact", "emotion_accuracy", "atmosphere", "coherence")


@dataclass(frozen=True)
class FeedbackRecord:
    """Four 1..5 Likert ratings from a post-session questionnaire."""

    mood_impact: int
    emotion_accuracy: int
    atmosphere: int
    coherence: int

    def __post_init__(self) -> None:
        for name in FEEDBACK_MEASURES:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
                raise OutOfRangeError(f"{name}={value!r} must be an integer in 1..5")


class FeedbackBuffer:
    """Bounded in-memory store; safe for concurrent append and read."""

    def __init__(self, capacity: int = DEFAULT_FEEDBACK_CAPACITY):
        if capacity < 1:
            raise OutOfRangeError("capacity must be >= 1")
        self._items: deque[FeedbackRecord] = deque(maxlen=capacity)
        self._lock = threading.Lock()

    def append(self, record: FeedbackRecord) -> None:
        with self._lock:
            self._items.append(record)

    def snapshot(self) -> list[FeedbackRecord]:
        with self._lock:
            return list(self._items)

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)


@dataclass(frozen=True)
class StageOutcome:
    role: str
    parameters: MusicalParameters
    prompt: str
    clips: SearchResult


@dataclass(frozen=True)
class SessionOutcome:
    emotion: EmotionVector
    tier: str
    degraded: bool
    journey: Journey
    stages: tuple[StageOutcome, ...]


class SessionPipeline:
    """Immutable pipeline components behind one `run(text)` entry point.

    The index reference is the only swappable piece: `reload_index`
    replaces it atomically, so concurrent readers see either the old or
    the new index, never a mixture.
    """

    def __init__(
        self,
        index: IvfIndex | None,
        *,
        lexicon: Lexicon | None = None,
        rules: RuleSet | None = None,
        weights: WeightMatrix | None = None,
        defaults: MusicalParameters = NEUTRAL_PARAMETERS,
        target: TargetPreset | None = None,
        blend: float = DEFAULT_BLEND,
        template: PromptTemplate | None = None,
        encoder: TextEncoder | None = None,
        scorer_endpoint: str | None = None,
        scorer_timeout_ms: float = 2000.0,
        k: int = DEFAULT_TOP_K,
        nprobe: int | None = None,
    ):
        self._index = index
        self._lexicon = default_lexicon() if lexicon is None else lexicon
        self._rules = default_rules() if rules is None else rules
        self._weights = default_weight_matrix() if weights is None else weights
        self._defaults = defaults
        self._target = default_target_preset() if target is None else target
        self._blend = blend
        self._template = default_prompt_template() if template is None else template
        dim = index.d if index is not None else DEFAULT_DIM
        self._encoder = HashingTextEncoder(dim) if encoder is None else encoder
        self._fallback_encoder = HashingTextEncoder(dim)
        self._scorer_endpoint = scorer_endpoint
        self._scorer_timeout_ms = scorer_timeout_ms
        self._k = k
        self._nprobe = nprobe

    @property
    def index(self) -> IvfIndex | None:
        return self._index

    @property
    def corpus_size(self) -> int:
        return self._index.size if self._index is not None else 0

    def reload_index(self, index: IvfIndex) -> None:
        self._index = index

    def score_text(self, text: str) -> EmotionVector:
        if self._scorer_endpoint:
            try:
                return external_score(text, self._scorer_endpoint, self._scorer_timeout_ms)
            except (RemoteTimeoutError, MalformedPayloadError, OutOfRangeError):
                pass
        return lexicon_score(text, self._lexicon)

    def _encode(self, prompt: str):
        try:
            return self._encoder.encode(prompt), False
        except (RemoteTimeoutError, MalformedPayloadError):
            return self._fallback_encoder.encode(prompt), True

    def run(self, text: str) -> SessionOutcome:
        index = self._index
        if index is None:
            raise RuntimeError("no index loaded")
        emotion = self.score_text(text)
        params, tier = infer_parameters(emotion, self._rules, self._weights, self._defaults)
        journey = plan_journey(params, self._target, self._blend)
        nprobe = self._nprobe if self._nprobe is not None else default_nprobe(index.nlist)
        degraded = False
        stages = []
        for role, stage_params in zip(STAGE_ROLES, journey.stages):
            prompt = build_prompt(stage_params, self._template)
            query, fell_back = self._encode(prompt)
            degraded = degraded or fell_back
            clips = search(index, query, self._k, nprobe)
            stages.append(StageOutcome(role, stage_params, prompt, clips))
        return SessionOutcome(emotion, tier, degraded, journey, tuple(stages))


@dataclass(frozen=True)
class ServiceConfig:
    """Deployment knobs, all overridable through EMOJOURNEY_* env vars."""

    index_path: str | None = None
    rules_path: str | None = None
    weights_path: str | None = None
    target_path: str | None = None
    scorer_endpoint: str | None = None
    encoder_endpoint: str | None = None
    scorer_timeout_ms: float = 2000.0
    encoder_timeout_ms: float = 2000.0
    blend: float = DEFAULT_BLEND
    k: int = DEFAULT_TOP_K
    nprobe: int | None = None
    feedback_capacity: int = DEFAULT_FEEDBACK_CAPACITY
    host: str = "127.0.0.1"
    port: int = 8000

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "ServiceConfig":
        e = os.environ if env is None else env

        def opt(name: str) -> str | None:
            value = e.get(f"EMOJOURNEY_{name}", "").strip()
            return value or None

        return cls(
            index_path=opt("INDEX"),
            rules_path=opt("RULES"),
            weights_path=opt("WEIGHTS"),
            target_path=opt("TARGET"),
            scorer_endpoint=opt("SCORER_URL"),
            encoder_endpoint=opt("ENCODER_URL"),
            scorer_timeout_ms=float(opt("SCORER_TIMEOUT_MS") or 2000.0),
            encoder_timeout_ms=float(opt("ENCODER_TIMEOUT_MS") or 2000.0),
            blend=float(opt("BLEND") or DEFAULT_BLEND),
            k=int(opt("K") or DEFAULT_TOP_K),
            nprobe=int(opt("NPROBE")) if opt("NPROBE") else None,
            feedback_capacity=int(opt("FEEDBACK_CAPACITY") or DEFAULT_FEEDBACK_CAPACITY),
            host=opt("HOST") or "127.0.0.1",
            port=int(opt("PORT") or 8000),
        )


def build_pipeline(config: ServiceConfig) -> SessionPipeline:
    """Load configured components (bundled defaults where unset)."""
    index = load_index(config.index_path) if config.index_path else None
    encoder: TextEncoder | None = None
    if config.encoder_endpoint:
        dim = index.d if index is not None else DEFAULT_DIM
        encoder = RemoteTextEncoder(
            config.encoder_endpoint, dim=dim, timeout_ms=config.encoder_timeout_ms
        )
    return SessionPipeline(
        index,
        rules=load_rules(config.rules_path) if config.rules_path else None,
        weights=load_weight_matrix(config.weights_path) if config.weights_path else None,
        target=load_target_preset(config.target_path) if config.target_path else None,
        blend=config.blend,
        encoder=encoder,
        scorer_endpoint=config.scorer_endpoint,
        scorer_timeout_ms=config.scorer_timeout_ms,
        k=config.k,
        nprobe=config.nprobe,
    )


class SessionBody(BaseModel):
    text: str


class FeedbackBody(BaseModel):
    mood_impact: int = Field(ge=1, le=5)
    emotion_accuracy: int = Field(ge=1, le=5)
    atmosphere: int = Field(ge=1, le=5)
    coherence: int = Field(ge=1, le=5)


def _session_json(outcome: SessionOutcome) -> dict:
    return {
        "emotion": list(outcome.emotion.scores),
        "tier": outcome.tier,
        "degraded": outcome.degraded,
        "stages": [
            {
                "role": stage.role,
                "prompt": stage.prompt,
                "clips": [
                    {"id": hit.clip_id, "score": hit.similarity} for hit in stage.clips.hits
                ],
            }
            for stage in outcome.stages
        ],
    }


def _measure_summary(name: str, values: Sequence[float]) -> dict:
    n = len(values)
    out: dict = {"measure": name, "n": n, "mean": None, "sd": None, "t": None, "p_two_sided": None}
    if n >= 1:
        out["mean"] = math.fsum(values) / n
    try:
        summary = one_sample_t(values, NEUTRAL_MIDPOINT)
        out.update(sd=summary.sd, t=summary.t, p_two_sided=summary.p_two_sided)
    except DegenerateDataError:
        pass
    return out


def create_app(
    pipeline: SessionPipeline | None = None,
    feedback_capacity: int = DEFAULT_FEEDBACK_CAPACITY,
) -> FastAPI:
    """Assemble the service around one pipeline and a fresh feedback buffer."""
    app = FastAPI(title="emojourney session service")
    app.state.pipeline = pipeline
    app.state.feedback = FeedbackBuffer(feedback_capacity)

    @app.post("/api/session")
    def create_session(body: SessionBody) -> dict:
        if len(body.text) > MAX_TEXT_CHARS:
            raise HTTPException(status_code=400, detail=f"text exceeds {MAX_TEXT_CHARS} characters")
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="text is empty")
        pipe: SessionPipeline | None = app.state.pipeline
        if pipe is None or pipe.index is None:
            raise HTTPException(status_code=503, detail="clip index unavailable")
        return _session_json(pipe.run(body.text))

    @app.post("/api/feedback", status_code=204)
    def record_feedback(body: FeedbackBody) -> Response:
        record = FeedbackRecord(
            mood_impact=body.mood_impact,
            emotion_accuracy=body.emotion_accuracy,
            atmosphere=body.atmosphere,
            coherence=body.coherence,
        )
        app.state.feedback.append(record)
        return Response(status_code=204)

    @app.get("/api/stats")
    def stats() -> dict:
        records = app.state.feedback.snapshot()
        measures = [
            _measure_summary(name, [getattr(r, name) for r in records])
            for name in FEEDBACK_MEASURES
        ]
        correlation: dict = {
            "measures": ["emotion_accuracy", "mood_impact"],
            "r": None,
            "p_two_sided": None,
        }
        try:
            r, p = pearson_r(
                [r.emotion_accuracy for r in records],
                [r.mood_impact for r in records],
            )
            correlation.update(r=r, p_two_sided=p)
        except DegenerateDataError:
            pass
        return {"measures": measures, "correlation": correlation}

    @app.get("/api/health")
    def health() -> dict:
        pipe: SessionPipeline | None = app.state.pipeline
        return {"status": "ok", "corpus_size": pipe.corpus_size if pipe else 0}

    return app
