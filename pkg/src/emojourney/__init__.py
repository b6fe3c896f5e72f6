"""Emotion-aware planning of three-stage calming music journeys.

Text is scored into a 27-dimensional emotion vector, mapped through a
two-tier rule/blend system onto six musical parameters, expanded into a
match/guide/target journey, rendered as text prompts, and matched against
an inverted-file cosine index of curated audiovisual clips.
"""

from .emotion_core import (
    EMOTION_LABELS,
    EmotionVector,
    FocalLossParams,
    MultiHotTarget,
    external_score,
    focal_loss,
    focal_loss_grad,
    label_index,
    label_name,
    lexicon_score,
    map_coarse_to_fine,
    validate_vector,
)
from .journey import Journey, TargetPreset, plan_journey
from .knowledge_graph import (
    NEUTRAL_PARAMETERS,
    PARAMETER_NAMES,
    MusicalParameters,
    Rule,
    RuleSet,
    WeightMatrix,
    apply_rule,
    blend_parameters,
    infer_parameters,
    match_rule,
)
from .media_curation import (
    CalmSegment,
    Clip,
    FrameFeature,
    SceneBoundary,
    curate_stream,
    detect_calm_segments,
    detect_scenes,
    partition_clips,
)
from .prompt_builder import PromptTemplate, build_prompt
from .retrieval_index import (
    ClipEmbedding,
    HashingTextEncoder,
    IvfIndex,
    RemoteTextEncoder,
    SearchResult,
    build_index,
    exact_search,
    load_index,
    read_embeddings,
    recall_at_k,
    save_index,
    search,
    stub_encode,
    temporal_average_pool,
    write_embeddings,
)
from .session_service import (
    FeedbackRecord,
    ServiceConfig,
    SessionPipeline,
    build_pipeline,
    create_app,
)
from .stats import StatSummary, one_sample_t, pearson_r

__version__ = "0.1.0"

__all__ = [
    "EMOTION_LABELS",
    "EmotionVector",
    "FocalLossParams",
    "MultiHotTarget",
    "external_score",
    "focal_loss",
    "focal_loss_grad",
    "label_index",
    "label_name",
    "lexicon_score",
    "map_coarse_to_fine",
    "validate_vector",
    "Journey",
    "TargetPreset",
    "plan_journey",
    "NEUTRAL_PARAMETERS",
    "PARAMETER_NAMES",
    "MusicalParameters",
    "Rule",
    "RuleSet",
    "WeightMatrix",
    "apply_rule",
    "blend_parameters",
    "infer_parameters",
    "match_rule",
    "CalmSegment",
    "Clip",
    "FrameFeature",
    "SceneBoundary",
    "curate_stream",
    "detect_calm_segments",
    "detect_scenes",
    "partition_clips",
    "PromptTemplate",
    "build_prompt",
    "ClipEmbedding",
    "HashingTextEncoder",
    "IvfIndex",
    "RemoteTextEncoder",
    "SearchResult",
    "build_index",
    "exact_search",
    "load_index",
    "read_embeddings",
    "recall_at_k",
    "save_index",
    "search",
    "stub_encode",
    "temporal_average_pool",
    "write_embeddings",
    "FeedbackRecord",
    "ServiceConfig",
    "SessionPipeline",
    "build_pipeline",
    "create_app",
    "StatSummary",
    "one_sample_t",
    "pearson_r",
]
