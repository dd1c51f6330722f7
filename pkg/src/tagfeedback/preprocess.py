"""Cleaning rules applied before any aggregation.

Multiple rows per (student, question) collapse to the single longest-duration
attempt; zero-duration rows are treated as guesses or idle interactions and
can never win the selection. Raw category labels are consolidated into the
fixed knowledge/ability taxonomies via external mapping files.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .model import AbilityDomain, AttemptRecord, KnowledgeArea

_ASSETS = Path(__file__).resolve().parent / "assets"
DEFAULT_KNOWLEDGE_MAP = _ASSETS / "knowledge_map.tsv"
DEFAULT_ABILITY_MAP = _ASSETS / "ability_map.tsv"


class EmptyMappingError(ValueError):
    """apply_mapping was handed a mapping with no entries for a dimension."""


class MappingFormatError(ValueError):
    """A mapping file row names an unknown consolidated category."""


@dataclass(frozen=True)
class CleanAttempt:
    """An AttemptRecord after dedup and category consolidation."""

    student_id: str
    question_id: str
    correct: int
    difficulty: int
    knowledge: KnowledgeArea
    ability: AbilityDomain
    duration: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"clean attempts must have positive duration, got {self.duration!r}")


@dataclass(frozen=True)
class CategoryMapping:
    knowledge: dict  # raw label -> KnowledgeArea
    ability: dict  # raw label -> AbilityDomain


@dataclass
class UnmappedReport:
    """Raw labels that had no mapping entry, with occurrence counts."""

    knowledge: Counter = field(default_factory=Counter)
    ability: Counter = field(default_factory=Counter)
    excluded: int = 0

    def items(self) -> list[tuple[str, str, int]]:
        rows = [("knowledge", label, n) for label, n in sorted(self.knowledge.items())]
        rows += [("ability", label, n) for label, n in sorted(self.ability.items())]
        return rows


def tie_break(records: list[AttemptRecord]) -> AttemptRecord:
    """Pick one record among attempts sharing the maximal duration.

    A correct record beats an incorrect one; among equals the latest in
    input order wins (the most recent genuine effort).
    """
    best = records[0]
    for r in records[1:]:
        if r.correct >= best.correct:
            best = r
    return best


def dedup_attempts(records) -> list[AttemptRecord]:
    """Retain exactly one attempt per (student, question): the longest one.

    Zero-duration rows lose the selection; a pair whose rows are all
    zero-duration is dropped entirely. Output keeps first-seen pair order.
    """
    groups: dict[tuple[str, str], list[AttemptRecord]] = {}
    for r in records:
        groups.setdefault((r.student_id, r.question_id), []).append(r)

    result = []
    for rows in groups.values():
        live = [r for r in rows if r.duration > 0]
        if not live:
            continue
        top = max(r.duration for r in live)
        result.append(tie_break([r for r in live if r.duration == top]))
    return result


def apply_mapping(records, mapping: CategoryMapping) -> tuple[list[CleanAttempt], UnmappedReport]:
    """Consolidate raw labels; exclude and report records with unmapped labels."""
    if not mapping.knowledge or not mapping.ability:
        raise EmptyMappingError("category mapping has no entries for at least one dimension")

    clean: list[CleanAttempt] = []
    report = UnmappedReport()
    for r in records:
        area = mapping.knowledge.get(r.knowledge_raw)
        domain = mapping.ability.get(r.ability_raw)
        if area is None:
            report.knowledge[r.knowledge_raw] += 1
        if domain is None:
            report.ability[r.ability_raw] += 1
        if area is None or domain is None:
            report.excluded += 1
            continue
        clean.append(
            CleanAttempt(
                student_id=r.student_id,
                question_id=r.question_id,
                correct=r.correct,
                difficulty=r.difficulty,
                knowledge=area,
                ability=domain,
                duration=r.duration,
            )
        )
    return clean, report


def _parse_mapping_line(line: str) -> tuple[str, str] | None:
    body = line.rstrip("\n")
    if not body.strip() or body.lstrip().startswith("#"):
        return None
    if "\t" in body:
        raw, _, name = body.partition("\t")
    else:
        raw, _, name = body.partition(",")
    return raw.strip(), name.strip()


def load_mapping_file(path, enum_cls) -> tuple[dict, list[str]]:
    """Load one two-column (raw_label, consolidated_name) mapping file.

    Duplicate raw labels follow last-one-wins with a warning. Consolidated
    names match enum values case-insensitively.
    """
    by_value = {member.value.lower(): member for member in enum_cls}
    mapping: dict = {}
    warnings: list[str] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        parsed = _parse_mapping_line(line)
        if parsed is None:
            continue
        raw, name = parsed
        if not raw or not name:
            raise MappingFormatError(f"{path}:{lineno}: expected 'raw_label<TAB>consolidated_name'")
        member = by_value.get(name.lower())
        if member is None:
            raise MappingFormatError(f"{path}:{lineno}: unknown {enum_cls.__name__} name {name!r}")
        if raw in mapping:
            warnings.append(f"{path}:{lineno}: duplicate raw label {raw!r}; keeping the later entry")
        mapping[raw] = member
    return mapping, warnings


def load_category_mapping(knowledge_path, ability_path) -> tuple[CategoryMapping, list[str]]:
    kmap, kwarn = load_mapping_file(knowledge_path, KnowledgeArea)
    amap, awarn = load_mapping_file(ability_path, AbilityDomain)
    return CategoryMapping(knowledge=kmap, ability=amap), kwarn + awarn


def default_category_mapping() -> CategoryMapping:
    """The small illustrative mapping bundled with the package."""
    mapping, _ = load_category_mapping(DEFAULT_KNOWLEDGE_MAP, DEFAULT_ABILITY_MAP)
    return mapping
