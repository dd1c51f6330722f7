"""Parsing of raw attempt event logs into validated AttemptRecord streams.

Two interchangeable source formats: CSV (UTF-8, comma, header row) and JSON
lines with identical field names. Malformed rows are rejected and reported,
never silently dropped; a missing required column aborts the whole parse.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .model import AttemptRecord

REQUIRED_COLUMNS = (
    "student_id",
    "question_id",
    "correct",
    "difficulty",
    "knowledge_raw",
    "ability_raw",
    "duration",
)

JSONL_SUFFIXES = {".jsonl", ".ndjson"}


class MissingColumnError(ValueError):
    """The source header lacks one or more required fields."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__(f"missing required columns: {', '.join(self.missing)}")


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    reasons: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, line_no: int, reason: str):
        self.rejected += 1
        self.reasons.append((line_no, reason))


def _normalize_row(row: dict) -> AttemptRecord | str:
    """Validate one raw row; return a record or a rejection reason."""
    for col in REQUIRED_COLUMNS:
        if row.get(col) is None:
            return f"missing {col}"

    student_id = str(row["student_id"]).strip()
    question_id = str(row["question_id"]).strip()
    if not student_id:
        return "missing student_id"
    if not question_id:
        return "missing question_id"

    try:
        correct = int(str(row["correct"]).strip())
    except ValueError:
        return "correct not an integer"
    if correct not in (0, 1):
        return "correct out of range"

    try:
        difficulty = int(str(row["difficulty"]).strip())
    except ValueError:
        return "difficulty not an integer"
    if difficulty not in (1, 2, 3):
        return "difficulty out of range"

    try:
        duration = float(str(row["duration"]).strip())
    except ValueError:
        return "duration not numeric"
    if not math.isfinite(duration):
        return "duration not numeric"
    if duration < 0:
        return "duration negative"

    return AttemptRecord(
        student_id=student_id,
        question_id=question_id,
        correct=correct,
        difficulty=difficulty,
        knowledge_raw=str(row["knowledge_raw"]),
        ability_raw=str(row["ability_raw"]),
        duration=duration,
    )


def parse_attempts_csv(stream) -> tuple[list[AttemptRecord], IngestReport]:
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise MissingColumnError(REQUIRED_COLUMNS)
    missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise MissingColumnError(missing)

    records: list[AttemptRecord] = []
    report = IngestReport()
    for row in reader:
        line_no = reader.line_num
        outcome = _normalize_row(row)
        if isinstance(outcome, AttemptRecord):
            records.append(outcome)
            report.accepted += 1
        else:
            report.reject(line_no, outcome)
    return records, report


def parse_attempts_jsonl(stream) -> tuple[list[AttemptRecord], IngestReport]:
    records: list[AttemptRecord] = []
    report = IngestReport()
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            report.reject(line_no, "invalid json")
            continue
        if not isinstance(obj, dict):
            report.reject(line_no, "row is not an object")
            continue
        outcome = _normalize_row(obj)
        if isinstance(outcome, AttemptRecord):
            records.append(outcome)
            report.accepted += 1
        else:
            report.reject(line_no, outcome)
    return records, report


def parse_attempts(source) -> tuple[list[AttemptRecord], IngestReport]:
    """Parse a CSV or JSON-lines attempt log from a path.

    The format is chosen by suffix (.jsonl/.ndjson vs anything else = CSV).
    Emitted records appear in file order; parsing is deterministic.
    """
    path = Path(source)
    with path.open(encoding="utf-8", newline="") as fh:
        if path.suffix.lower() in JSONL_SUFFIXES:
            return parse_attempts_jsonl(fh)
        return parse_attempts_csv(fh)


def write_attempts_csv(records, path) -> None:
    """Write records in the same schema parse_attempts consumes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REQUIRED_COLUMNS)
        for r in records:
            writer.writerow(
                [r.student_id, r.question_id, r.correct, r.difficulty, r.knowledge_raw, r.ability_raw, r.duration]
            )
