"""Rendering of a student's tag vector into the structured chat prompt.

A prompt has a global style preamble plus six fixed sections; performance,
knowledge, and ability tag descriptions land verbatim in their matching
sections, and the remaining sections receive a short observation-count note.
Rendering is pure: the same tag vector and template always produce the same
bytes.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

from .model import TAG_COUNT, TagCategory, TagSet, tag_description

SECTION_NAMES = (
    "Overview",
    "Basic Analysis",
    "Knowledge Category Analysis",
    "Ability Analysis",
    "Learning Strategies and Recommendations",
    "Summary",
)

TAG_SLOT = "{tags}"

_SECTION_CATEGORY = {
    "Basic Analysis": TagCategory.BASIC,
    "Knowledge Category Analysis": TagCategory.KNOWLEDGE,
    "Ability Analysis": TagCategory.ABILITY,
}

_CATEGORY_LABEL = {
    TagCategory.BASIC: "performance",
    TagCategory.KNOWLEDGE: "knowledge category",
    TagCategory.ABILITY: "ability",
}

DEFAULT_TEMPLATE_PATH = Path(__file__).resolve().parent / "assets" / "default_template.txt"


class TemplateError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class UnknownStudentError(KeyError):
    def __init__(self, student_id):
        self.student_id = student_id
        super().__init__(f"student {student_id!r} not present in the tag dataset")


class MalformedTagRowError(ValueError):
    pass


class InvalidTagSetError(ValueError):
    """The tag vector violates a mutual-exclusion invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class SectionSpec:
    name: str
    body: str  # instruction text containing the {tags} slot


@dataclass(frozen=True)
class PromptTemplate:
    style: str
    sections: tuple[SectionSpec, ...]


_MARKER = re.compile(r"^\[(style|section:\s*(?P<name>.+?))\]\s*$")


def parse_template(text: str) -> PromptTemplate:
    """Parse the template asset format; collect every structural problem."""
    style_parts: list[str] | None = None
    sections: list[tuple[str, list[str]]] = []
    current: list[str] | None = None
    problems: list[str] = []

    for raw in text.splitlines():
        m = _MARKER.match(raw.strip())
        if m:
            if m.group(1) == "style":
                if style_parts is not None:
                    problems.append("duplicate [style] block")
                style_parts = current = []
            else:
                name = m.group("name").strip()
                sections.append((name, []))
                current = sections[-1][1]
            continue
        if current is None:
            # leading comments/blank lines before the first marker are fine
            if raw.strip() and not raw.lstrip().startswith("#"):
                problems.append(f"text before the first block marker: {raw.strip()!r}")
            continue
        current.append(raw)

    if style_parts is None:
        problems.append("missing [style] block")

    names = [name for name, _ in sections]
    if names != list(SECTION_NAMES):
        problems.append(
            f"sections must be exactly {list(SECTION_NAMES)} in order, got {names}"
        )
    specs = []
    for name, lines in sections:
        body = "\n".join(lines).strip()
        if TAG_SLOT not in body:
            problems.append(f"section {name!r} is missing the {TAG_SLOT} slot")
        if not body.replace(TAG_SLOT, "").strip():
            problems.append(f"section {name!r} has no instruction text")
        specs.append(SectionSpec(name=name, body=body))

    if problems:
        raise TemplateError(problems)
    return PromptTemplate(style="\n".join(style_parts).strip(), sections=tuple(specs))


def load_template(path=None) -> PromptTemplate:
    source = Path(path) if path is not None else DEFAULT_TEMPLATE_PATH
    return parse_template(source.read_text(encoding="utf-8"))


def _section_filler(section_name: str, tags: TagSet) -> str:
    category = _SECTION_CATEGORY.get(section_name)
    chosen = tags.set_tags()
    if category is not None:
        described = [t for t in chosen if t.category is category]
        if not described:
            label = _CATEGORY_LABEL[category]
            return (
                f"No {label} tags were triggered for this student; "
                "the available data is insufficient for this part of the analysis."
            )
        return "Observations for this section:\n" + "\n".join(
            f"- {tag_description(t)}" for t in described
        )
    counts = {cat: 0 for cat in TagCategory}
    for t in chosen:
        counts[t.category] += 1
    total = len(chosen)
    if total == 0:
        return (
            "No tagged observations are available for this student; "
            "the collected data is insufficient for a detailed analysis."
        )
    return (
        f"This report draws on {total} tagged observations: "
        f"{counts[TagCategory.BASIC]} performance, "
        f"{counts[TagCategory.KNOWLEDGE]} knowledge category, "
        f"{counts[TagCategory.ABILITY]} ability."
    )


def render_prompt(tags: TagSet, template: PromptTemplate | None = None) -> str:
    """Expand the six-section prompt for one student's tag vector.

    Rejects vectors violating the mutual-exclusion invariants; a corrupt
    input would otherwise produce a self-contradictory report.
    """
    violations = tags.exclusion_violations()
    if violations:
        raise InvalidTagSetError(violations)
    template = template or load_template()

    parts = [template.style]
    for section in template.sections:
        body = section.body.replace(TAG_SLOT, _section_filler(section.name, tags))
        parts.append(f"## {section.name}\n{body}")
    return "\n\n".join(parts) + "\n"


def _parse_tag_row(row: list[str], line_no: int) -> tuple[str, TagSet]:
    if len(row) != 1 + TAG_COUNT:
        raise MalformedTagRowError(
            f"line {line_no}: expected student_id plus {TAG_COUNT} flags, got {len(row)} fields"
        )
    sid = row[0].strip()
    if not sid:
        raise MalformedTagRowError(f"line {line_no}: empty student_id")
    flags = []
    for cell in row[1:]:
        cell = cell.strip()
        if cell not in ("0", "1"):
            raise MalformedTagRowError(f"line {line_no}: flag value {cell!r} is not 0 or 1")
        flags.append(int(cell))
    return sid, TagSet(tuple(flags))


def load_tag_table(path) -> dict[str, TagSet]:
    """Load a student tag dataset file; a header row is tolerated and skipped."""
    table: dict[str, TagSet] = {}
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if line_no == 1 and row[0].strip() == "student_id":
                continue
            sid, tags = _parse_tag_row(row, line_no)
            table[sid] = tags
    return table


def get_student_tags(dataset, student_id: str) -> TagSet:
    """Fetch one student's 34-flag vector from a tag dataset (path or mapping)."""
    table = dataset if isinstance(dataset, dict) else load_tag_table(dataset)
    try:
        return table[student_id]
    except KeyError:
        raise UnknownStudentError(student_id) from None
