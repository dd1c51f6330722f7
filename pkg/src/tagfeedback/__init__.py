"""Student attempt tagging and personalized feedback generation.

Pipeline: raw attempt logs -> cleaning (dedup, category mapping) ->
34-flag tag vector per student -> structured prompt -> chat-completion
backend -> per-student markdown report. Also ships survey statistics
and a synthetic cohort generator for end-to-end validation.
"""

from .evalstats import (
    DIMENSIONS,
    DimensionSummary,
    FilterResult,
    SurveyResponse,
    filter_responses,
    load_survey,
    summarize,
    summarize_values,
    tukey_hinges,
)
from .gateway import (
    CompletionParams,
    CompletionResult,
    GatewayError,
    HttpBackend,
    MockBackend,
    RetryPolicy,
    complete,
    complete_many,
)
from .ingest import IngestReport, parse_attempts, parse_attempts_csv, parse_attempts_jsonl
from .model import (
    ORDERED_TAGS,
    TAG_COUNT,
    TAG_DESCRIPTIONS,
    AbilityDomain,
    AttemptRecord,
    ConfigError,
    GatewaySettings,
    KnowledgeArea,
    PipelineConfig,
    TagCategory,
    TagId,
    TagSet,
    load_config,
    tag_description,
    validate_config,
)
from .preprocess import (
    CategoryMapping,
    CleanAttempt,
    apply_mapping,
    dedup_attempts,
    default_category_mapping,
    load_category_mapping,
)
from .promptgen import PromptTemplate, load_tag_table, load_template, render_prompt
from .report import BatchResult, StudentReport, generate_batch, write_report
from .synth import CohortSpec, LatentProfile, draw_profiles, generate_cohort, generate_from_spec
from .tagger import SpeedClass, StudentAggregate, aggregate, classify_speed, tag_cohort, write_tag_table

__version__ = "0.1.0"

__all__ = [
    "AbilityDomain",
    "AttemptRecord",
    "BatchResult",
    "CategoryMapping",
    "CleanAttempt",
    "CohortSpec",
    "CompletionParams",
    "CompletionResult",
    "ConfigError",
    "DIMENSIONS",
    "DimensionSummary",
    "FilterResult",
    "GatewayError",
    "GatewaySettings",
    "HttpBackend",
    "IngestReport",
    "KnowledgeArea",
    "LatentProfile",
    "MockBackend",
    "ORDERED_TAGS",
    "PipelineConfig",
    "PromptTemplate",
    "RetryPolicy",
    "SpeedClass",
    "StudentAggregate",
    "StudentReport",
    "SurveyResponse",
    "TAG_COUNT",
    "TAG_DESCRIPTIONS",
    "TagCategory",
    "TagId",
    "TagSet",
    "aggregate",
    "apply_mapping",
    "classify_speed",
    "complete",
    "complete_many",
    "dedup_attempts",
    "default_category_mapping",
    "draw_profiles",
    "filter_responses",
    "generate_batch",
    "generate_cohort",
    "generate_from_spec",
    "load_category_mapping",
    "load_config",
    "load_survey",
    "load_tag_table",
    "load_template",
    "parse_attempts",
    "parse_attempts_csv",
    "parse_attempts_jsonl",
    "render_prompt",
    "summarize",
    "summarize_values",
    "tag_cohort",
    "tag_description",
    "tukey_hinges",
    "validate_config",
    "write_report",
    "write_tag_table",
]
