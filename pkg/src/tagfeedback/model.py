"""Domain types shared by every pipeline stage.

The tag taxonomy is the heart of the package: 34 binary flags split into
12 performance tags (difficulty x accuracy band x speed class), 10 knowledge
tags (5 content areas, positive/negative), and 12 ability tags (6 skill
domains, positive/negative). Everything here is immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path


class KnowledgeArea(Enum):
    """The five consolidated math content areas, in Tag_2_1..Tag_2_5 order."""

    SPEED_AND_TIME = "SpeedAndTime"
    GEOMETRIC_SHAPES = "GeometricShapes"
    DATA_STATISTICS_PROBABILITY = "DataStatisticsProbability"
    ALGEBRA_FUNCTIONS = "AlgebraFunctions"
    ARITHMETIC_OPERATIONS = "ArithmeticOperations"


class AbilityDomain(Enum):
    """The six consolidated skill domains, in Tag_3_1..Tag_3_6 order."""

    PRACTICAL_APPLICATION = "PracticalApplication"
    DATA_ORGANIZATION_STATISTICS = "DataOrganizationStatistics"
    COMPUTATIONAL = "Computational"
    GEOMETRIC_THINKING = "GeometricThinking"
    REASONING_LOGICAL = "ReasoningLogical"
    INNOVATIVE_ABSTRACT = "InnovativeAbstract"


class TagCategory(Enum):
    BASIC = "Basic"
    KNOWLEDGE = "Knowledge"
    ABILITY = "Ability"


class TagId(Enum):
    """All 34 tag identifiers. Definition order is the canonical vector order."""

    Tag_1_1 = "Tag_1_1"
    Tag_1_2 = "Tag_1_2"
    Tag_1_3 = "Tag_1_3"
    Tag_1_4 = "Tag_1_4"
    Tag_1_5 = "Tag_1_5"
    Tag_1_6 = "Tag_1_6"
    Tag_1_7 = "Tag_1_7"
    Tag_1_8 = "Tag_1_8"
    Tag_1_9 = "Tag_1_9"
    Tag_1_10 = "Tag_1_10"
    Tag_1_11 = "Tag_1_11"
    Tag_1_12 = "Tag_1_12"
    Tag_2_1 = "Tag_2_1"
    Tag_2_2 = "Tag_2_2"
    Tag_2_3 = "Tag_2_3"
    Tag_2_4 = "Tag_2_4"
    Tag_2_5 = "Tag_2_5"
    Tag_2_6 = "Tag_2_6"
    Tag_2_7 = "Tag_2_7"
    Tag_2_8 = "Tag_2_8"
    Tag_2_9 = "Tag_2_9"
    Tag_2_10 = "Tag_2_10"
    Tag_3_1 = "Tag_3_1"
    Tag_3_2 = "Tag_3_2"
    Tag_3_3 = "Tag_3_3"
    Tag_3_4 = "Tag_3_4"
    Tag_3_5 = "Tag_3_5"
    Tag_3_6 = "Tag_3_6"
    Tag_3_7 = "Tag_3_7"
    Tag_3_8 = "Tag_3_8"
    Tag_3_9 = "Tag_3_9"
    Tag_3_10 = "Tag_3_10"
    Tag_3_11 = "Tag_3_11"
    Tag_3_12 = "Tag_3_12"

    @property
    def category(self) -> TagCategory:
        group = self.value.split("_")[1]
        return {"1": TagCategory.BASIC, "2": TagCategory.KNOWLEDGE, "3": TagCategory.ABILITY}[group]

    @property
    def ordinal(self) -> int:
        """Number within the tag's group (Tag_2_7 -> 7)."""
        return int(self.value.rsplit("_", 1)[1])

    @property
    def index(self) -> int:
        """Zero-based position in the canonical 34-flag vector."""
        return _TAG_INDEX[self]


ORDERED_TAGS: tuple[TagId, ...] = tuple(TagId)
_TAG_INDEX = {tag: i for i, tag in enumerate(ORDERED_TAGS)}

TAG_COUNT = len(ORDERED_TAGS)

TAG_DESCRIPTIONS: dict[TagId, str] = {
    TagId.Tag_1_1: "Correctly and quickly on easy questions.",
    TagId.Tag_1_2: "Correctly and quickly on medium difficulty questions.",
    TagId.Tag_1_3: "Correctly and quickly on difficult questions.",
    TagId.Tag_1_4: "Correctly but completed slowly on easy questions.",
    TagId.Tag_1_5: "Correctly but completed slowly on medium difficulty questions.",
    TagId.Tag_1_6: "Correctly but completed slowly on difficult questions.",
    TagId.Tag_1_7: "Incorrectly but completed quickly on easy questions.",
    TagId.Tag_1_8: "Answered incorrectly but quickly on medium difficulty questions.",
    TagId.Tag_1_9: "Incorrectly but completed quickly on difficult questions.",
    TagId.Tag_1_10: "Incorrectly but completed slowly on easy questions.",
    TagId.Tag_1_11: "Incorrectly but completed slowly on medium difficulty questions.",
    TagId.Tag_1_12: "Incorrectly but completed slowly on difficult questions.",
    TagId.Tag_2_1: "Outstanding performance in calculations speed and time.",
    TagId.Tag_2_2: "Outstanding in the identification and geometric shapes.",
    TagId.Tag_2_3: "Outstanding in data statistics and probability problems.",
    TagId.Tag_2_4: "Outstanding in algebraic equations and functions.",
    TagId.Tag_2_5: "Outstanding in arithmetic operations and properties.",
    TagId.Tag_2_6: "Struggling with calculations involving speed and time.",
    TagId.Tag_2_7: "Struggling to recognize and work with geometric shapes.",
    TagId.Tag_2_8: "Finding data statistics and probability problems challenging.",
    TagId.Tag_2_9: "Struggling with algebraic equations and functions.",
    TagId.Tag_2_10: "Struggling with arithmetic operations and properties.",
    TagId.Tag_3_1: "Strong capabilities in practical application of mathematics.",
    TagId.Tag_3_2: "Strong capabilities in statistical analysis.",
    TagId.Tag_3_3: "Strong computational skills.",
    TagId.Tag_3_4: "Strong geometric thinking skills.",
    TagId.Tag_3_5: "Strong logical reasoning skills.",
    TagId.Tag_3_6: "Strong innovative and abstract thinking skills.",
    TagId.Tag_3_7: "Challenged by the practical application of mathematics.",
    TagId.Tag_3_8: "Challenged by statistical analysis.",
    TagId.Tag_3_9: "Challenged by computational skills.",
    TagId.Tag_3_10: "Challenged by geometric thinking skills.",
    TagId.Tag_3_11: "Challenged by logical reasoning.",
    TagId.Tag_3_12: "Challenged by innovative and abstract thinking.",
}


def tag_description(tag: TagId) -> str:
    """Return the catalog description for a tag. Total over the enumeration."""
    return TAG_DESCRIPTIONS[tag]


def knowledge_positive_tag(area: KnowledgeArea) -> TagId:
    i = list(KnowledgeArea).index(area) + 1
    return TagId[f"Tag_2_{i}"]


def knowledge_negative_tag(area: KnowledgeArea) -> TagId:
    i = list(KnowledgeArea).index(area) + 1
    return TagId[f"Tag_2_{i + 5}"]


def ability_positive_tag(domain: AbilityDomain) -> TagId:
    i = list(AbilityDomain).index(domain) + 1
    return TagId[f"Tag_3_{i}"]


def ability_negative_tag(domain: AbilityDomain) -> TagId:
    i = list(AbilityDomain).index(domain) + 1
    return TagId[f"Tag_3_{i + 6}"]


def performance_tag(difficulty: int, correct_band: bool, fast: bool) -> TagId:
    """Performance tag for one difficulty level.

    correct_band True means the adequate (high accuracy) band, False the
    struggling band; fast True means the Fast speed class, False Slow.
    """
    if difficulty not in (1, 2, 3):
        raise ValueError(f"difficulty must be 1, 2 or 3, got {difficulty}")
    offset = 0 if correct_band else 6
    offset += 0 if fast else 3
    return TagId[f"Tag_1_{difficulty + offset}"]


@dataclass(frozen=True)
class AttemptRecord:
    """One raw answer event as exported by the learning system."""

    student_id: str
    question_id: str
    correct: int
    difficulty: int
    knowledge_raw: str
    ability_raw: str
    duration: float

    def __post_init__(self):
        if self.correct not in (0, 1):
            raise ValueError(f"correct must be 0 or 1, got {self.correct!r}")
        if self.difficulty not in (1, 2, 3):
            raise ValueError(f"difficulty must be in 1..3, got {self.difficulty!r}")
        if not (isinstance(self.duration, (int, float)) and math.isfinite(self.duration)):
            raise ValueError(f"duration must be a finite number, got {self.duration!r}")
        if self.duration < 0:
            raise ValueError(f"duration must be non-negative, got {self.duration!r}")


@dataclass(frozen=True)
class TagSet:
    """Ordered vector of 34 binary flags, indexed by TagId.

    Construction enforces length and 0/1 values only; the pairwise mutual
    exclusions are a checkable property (``exclusion_violations``) so that
    invalid vectors read from external files can be represented and rejected
    at the point of use.
    """

    flags: tuple[int, ...]

    def __post_init__(self):
        if len(self.flags) != TAG_COUNT:
            raise ValueError(f"expected {TAG_COUNT} flags, got {len(self.flags)}")
        if any(f not in (0, 1) for f in self.flags):
            raise ValueError("flags must all be 0 or 1")

    @classmethod
    def from_tags(cls, tags) -> "TagSet":
        chosen = set(tags)
        return cls(tuple(1 if t in chosen else 0 for t in ORDERED_TAGS))

    @classmethod
    def zeros(cls) -> "TagSet":
        return cls((0,) * TAG_COUNT)

    def __getitem__(self, tag: TagId) -> int:
        return self.flags[tag.index]

    def set_tags(self) -> tuple[TagId, ...]:
        """The tags whose flag is 1, in canonical order."""
        return tuple(t for t in ORDERED_TAGS if self.flags[t.index])

    def count(self) -> int:
        return sum(self.flags)

    def exclusion_violations(self) -> list[str]:
        """Mutual-exclusion problems, empty for a well-formed vector."""
        problems = []
        for d in (1, 2, 3):
            group = [TagId[f"Tag_1_{d + off}"] for off in (0, 3, 6, 9)]
            lit = [t.value for t in group if self[t]]
            if len(lit) > 1:
                problems.append(f"difficulty {d}: multiple performance tags set ({', '.join(lit)})")
        for i in range(1, 6):
            pos, neg = TagId[f"Tag_2_{i}"], TagId[f"Tag_2_{i + 5}"]
            if self[pos] and self[neg]:
                problems.append(f"knowledge area {i}: both {pos.value} and {neg.value} set")
        for i in range(1, 7):
            pos, neg = TagId[f"Tag_3_{i}"], TagId[f"Tag_3_{i + 6}"]
            if self[pos] and self[neg]:
                problems.append(f"ability domain {i}: both {pos.value} and {neg.value} set")
        return problems


class ConfigError(ValueError):
    """Raised when a PipelineConfig violates its invariants.

    Carries every violation, not just the first one.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class GatewaySettings:
    """Chat-completion backend settings; endpoint empty means unconfigured."""

    endpoint: str = ""
    model: str = "gpt-4"
    max_concurrency: int = 4
    max_attempts: int = 3
    base_delay: float = 0.5
    max_delay: float = 8.0
    timeout: float = 60.0
    min_request_interval: float = 0.0
    api_key_env: str = "TAGFEEDBACK_API_KEY"


@dataclass(frozen=True)
class PipelineConfig:
    adequate_threshold: float = 0.65
    struggling_threshold: float = 0.55
    speed_cohort_cutoff: int = 40
    speed_extreme_fraction: float = 0.25
    min_attempts_per_dimension: int = 3
    knowledge_mapping: str | None = None
    ability_mapping: str | None = None
    survey_low_total_threshold: int = 5
    gateway: GatewaySettings = field(default_factory=GatewaySettings)


def config_errors(cfg: PipelineConfig) -> list[str]:
    """Every invariant violation in cfg, with stable error-kind prefixes."""
    errors = []
    if not (0.0 <= cfg.struggling_threshold <= 1.0 and 0.0 <= cfg.adequate_threshold <= 1.0):
        errors.append("threshold_range: thresholds must lie in [0, 1]")
    if cfg.struggling_threshold >= cfg.adequate_threshold:
        errors.append(
            "threshold_order: struggling_threshold "
            f"({cfg.struggling_threshold}) must be below adequate_threshold ({cfg.adequate_threshold})"
        )
    if not (0.0 < cfg.speed_extreme_fraction <= 0.5):
        errors.append(
            f"fraction_range: speed_extreme_fraction ({cfg.speed_extreme_fraction}) must be in (0, 0.5]"
        )
    if cfg.speed_cohort_cutoff < 1:
        errors.append(f"cutoff_range: speed_cohort_cutoff ({cfg.speed_cohort_cutoff}) must be >= 1")
    if cfg.min_attempts_per_dimension < 1:
        errors.append(
            f"min_attempts_range: min_attempts_per_dimension ({cfg.min_attempts_per_dimension}) must be >= 1"
        )
    if not (0 <= cfg.survey_low_total_threshold < 50):
        errors.append(
            f"survey_threshold_range: survey_low_total_threshold ({cfg.survey_low_total_threshold}) "
            "must be in [0, 50)"
        )
    for label, path in (("knowledge_mapping", cfg.knowledge_mapping), ("ability_mapping", cfg.ability_mapping)):
        if path is not None and not Path(path).is_file():
            errors.append(f"missing_mapping_file: {label} path does not exist: {path}")
    gw = cfg.gateway
    if gw.max_concurrency < 1:
        errors.append(f"gateway_range: max_concurrency ({gw.max_concurrency}) must be >= 1")
    if gw.max_attempts < 1:
        errors.append(f"gateway_range: max_attempts ({gw.max_attempts}) must be >= 1")
    if gw.timeout <= 0:
        errors.append(f"gateway_range: timeout ({gw.timeout}) must be positive")
    return errors


def validate_config(cfg: PipelineConfig) -> PipelineConfig:
    """Return cfg unchanged if it is valid, else raise ConfigError with all violations."""
    errors = config_errors(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


_FLOAT_KEYS = {"adequate_threshold", "struggling_threshold", "speed_extreme_fraction"}
_INT_KEYS = {"speed_cohort_cutoff", "min_attempts_per_dimension", "survey_low_total_threshold"}
_PATH_KEYS = {"knowledge_mapping", "ability_mapping"}
_GATEWAY_FLOAT_KEYS = {"base_delay", "max_delay", "timeout", "min_request_interval"}
_GATEWAY_INT_KEYS = {"max_concurrency", "max_attempts"}
_GATEWAY_STR_KEYS = {"endpoint", "model", "api_key_env"}


def load_config(path) -> PipelineConfig:
    """Parse a flat key-value config file; every key is optional.

    Format: one ``key = value`` pair per line, '#' starts a comment. Unknown
    keys and unparseable values are collected and raised together.
    """
    text = Path(path).read_text(encoding="utf-8")
    values: dict[str, str] = {}
    errors: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"config_syntax: line {lineno} is not a key = value pair: {raw.strip()!r}")
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()

    cfg_kwargs = {}
    gw_kwargs = {}
    for key, value in values.items():
        try:
            if key in _FLOAT_KEYS:
                cfg_kwargs[key] = float(value)
            elif key in _INT_KEYS:
                cfg_kwargs[key] = int(value)
            elif key in _PATH_KEYS:
                cfg_kwargs[key] = value
            elif key in _GATEWAY_FLOAT_KEYS:
                gw_kwargs[key] = float(value)
            elif key in _GATEWAY_INT_KEYS:
                gw_kwargs[key] = int(value)
            elif key in _GATEWAY_STR_KEYS:
                gw_kwargs[key] = value
            else:
                errors.append(f"config_unknown_key: {key}")
        except ValueError:
            errors.append(f"config_bad_value: {key} = {value!r}")
    if errors:
        raise ConfigError(errors)
    cfg = PipelineConfig(gateway=GatewaySettings(**gw_kwargs), **cfg_kwargs)
    return validate_config(cfg)


def override_config(cfg: PipelineConfig, **kwargs) -> PipelineConfig:
    """Copy cfg with the given non-None field overrides applied."""
    cfg_fields = {f.name for f in fields(PipelineConfig)}
    updates = {k: v for k, v in kwargs.items() if v is not None and k in cfg_fields}
    return replace(cfg, **updates) if updates else cfg
