"""Per-student aggregation and the 34-tag rule system.

Accuracy bands: a dimension is tagged positive only when accuracy is strictly
above the adequate threshold (default 0.65) and negative only when strictly
below the struggling threshold (default 0.55); the closed middle band yields
no tag. Speed is peer-relative per difficulty level: a median split for small
cohorts, an extreme-fraction split with an untagged middle for cohorts larger
than the configured cutoff.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .model import (
    AbilityDomain,
    KnowledgeArea,
    PipelineConfig,
    TagId,
    TagSet,
    ability_negative_tag,
    ability_positive_tag,
    knowledge_negative_tag,
    knowledge_positive_tag,
    performance_tag,
)

DIFFICULTY_LEVELS = (1, 2, 3)


class SpeedClass(Enum):
    FAST = "Fast"
    SLOW = "Slow"
    NEITHER = "Neither"


@dataclass
class DimStats:
    attempts: int = 0
    correct: int = 0
    duration_total: float = 0.0

    def add(self, correct: int, duration: float):
        self.attempts += 1
        self.correct += correct
        self.duration_total += duration

    @property
    def accuracy(self) -> float:
        return self.correct / self.attempts

    @property
    def mean_duration(self) -> float:
        return self.duration_total / self.attempts


@dataclass
class StudentAggregate:
    """Accuracy and duration statistics per difficulty, area, and domain.

    Dimensions with zero attempts are simply absent from the maps.
    """

    student_id: str
    by_difficulty: dict = field(default_factory=dict)
    by_knowledge: dict = field(default_factory=dict)
    by_ability: dict = field(default_factory=dict)

    def _stats(self, table, key) -> DimStats:
        stats = table.get(key)
        if stats is None:
            stats = table[key] = DimStats()
        return stats


def aggregate(attempts) -> dict[str, StudentAggregate]:
    """Fold cleaned attempts into per-student aggregates, first-seen order."""
    out: dict[str, StudentAggregate] = {}
    for a in attempts:
        agg = out.get(a.student_id)
        if agg is None:
            agg = out[a.student_id] = StudentAggregate(a.student_id)
        agg._stats(agg.by_difficulty, a.difficulty).add(a.correct, a.duration)
        agg._stats(agg.by_knowledge, a.knowledge).add(a.correct, a.duration)
        agg._stats(agg.by_ability, a.ability).add(a.correct, a.duration)
    return out


def classify_speed(aggregates, level: int, cfg: PipelineConfig) -> dict[str, SpeedClass]:
    """Rank one difficulty level's cohort by mean duration and split it.

    Cohort = students with at least one attempt at the level, ranked
    ascending by mean duration (ties by student id). At or below the cohort
    cutoff: median split, rank <= ceil(n/2) is Fast and the rest Slow. Above
    the cutoff only the extreme fractions are tagged and the middle is
    Neither.
    """
    cohort = [
        (agg.by_difficulty[level].mean_duration, sid)
        for sid, agg in aggregates.items()
        if level in agg.by_difficulty
    ]
    cohort.sort()
    n = len(cohort)
    classes: dict[str, SpeedClass] = {}
    if n == 0:
        return classes
    if n <= cfg.speed_cohort_cutoff:
        fast_upto = math.ceil(n / 2)
        for rank, (_, sid) in enumerate(cohort, start=1):
            classes[sid] = SpeedClass.FAST if rank <= fast_upto else SpeedClass.SLOW
    else:
        k = math.ceil(cfg.speed_extreme_fraction * n)
        for rank, (_, sid) in enumerate(cohort, start=1):
            if rank <= k:
                classes[sid] = SpeedClass.FAST
            elif rank > n - k:
                classes[sid] = SpeedClass.SLOW
            else:
                classes[sid] = SpeedClass.NEITHER
    return classes


def performance_tags(agg: StudentAggregate, speed_by_level, cfg: PipelineConfig) -> set[TagId]:
    """Tag_1_1..Tag_1_12: difficulty x accuracy band x speed class."""
    tags: set[TagId] = set()
    for d in DIFFICULTY_LEVELS:
        stats = agg.by_difficulty.get(d)
        if stats is None or stats.attempts < cfg.min_attempts_per_dimension:
            continue
        speed = speed_by_level.get(d)
        if speed is None or speed is SpeedClass.NEITHER:
            continue
        acc = stats.accuracy
        if acc > cfg.adequate_threshold:
            tags.add(performance_tag(d, correct_band=True, fast=speed is SpeedClass.FAST))
        elif acc < cfg.struggling_threshold:
            tags.add(performance_tag(d, correct_band=False, fast=speed is SpeedClass.FAST))
    return tags


def knowledge_tags(agg: StudentAggregate, cfg: PipelineConfig) -> set[TagId]:
    """Tag_2_1..Tag_2_10: positive/negative per knowledge area."""
    tags: set[TagId] = set()
    for area in KnowledgeArea:
        stats = agg.by_knowledge.get(area)
        if stats is None or stats.attempts < cfg.min_attempts_per_dimension:
            continue
        if stats.accuracy > cfg.adequate_threshold:
            tags.add(knowledge_positive_tag(area))
        elif stats.accuracy < cfg.struggling_threshold:
            tags.add(knowledge_negative_tag(area))
    return tags


def ability_tags(agg: StudentAggregate, cfg: PipelineConfig) -> set[TagId]:
    """Tag_3_1..Tag_3_12: positive/negative per ability domain."""
    tags: set[TagId] = set()
    for domain in AbilityDomain:
        stats = agg.by_ability.get(domain)
        if stats is None or stats.attempts < cfg.min_attempts_per_dimension:
            continue
        if stats.accuracy > cfg.adequate_threshold:
            tags.add(ability_positive_tag(domain))
        elif stats.accuracy < cfg.struggling_threshold:
            tags.add(ability_negative_tag(domain))
    return tags


def tag_student(agg: StudentAggregate, speed_by_level, cfg: PipelineConfig) -> TagSet:
    """Union of the three partial tag computations for one student."""
    tags = performance_tags(agg, speed_by_level, cfg)
    tags |= knowledge_tags(agg, cfg)
    tags |= ability_tags(agg, cfg)
    return TagSet.from_tags(tags)


def tag_cohort(attempts, cfg: PipelineConfig | None = None) -> dict[str, TagSet]:
    """Run the whole tag pipeline on cleaned attempts for every student."""
    cfg = cfg or PipelineConfig()
    aggregates = aggregate(attempts)
    speed: dict[str, dict[int, SpeedClass]] = defaultdict(dict)
    for level in DIFFICULTY_LEVELS:
        for sid, cls in classify_speed(aggregates, level, cfg).items():
            speed[sid][level] = cls
    return {sid: tag_student(agg, speed[sid], cfg) for sid, agg in aggregates.items()}


def write_tag_table(tags, path) -> None:
    """Write the student tag dataset: one row per student, id then 34 flags.

    Rows are sorted by student id so reruns are byte-identical.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for sid in sorted(tags):
            writer.writerow([sid, *tags[sid].flags])
