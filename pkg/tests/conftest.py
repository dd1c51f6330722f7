import random

import pytest
from hypothesis import strategies as st

from tagfeedback.model import (
    ORDERED_TAGS,
    AbilityDomain,
    AttemptRecord,
    KnowledgeArea,
    PipelineConfig,
    TagId,
    TagSet,
)
from tagfeedback.preprocess import CleanAttempt

AREAS = list(KnowledgeArea)
DOMAINS = list(AbilityDomain)


def make_attempt(student_id="s1", question_id="q1", correct=1, difficulty=1,
                 knowledge_raw="SpeedAndTime", ability_raw="Computational",
                 duration=10.0) -> AttemptRecord:
    return AttemptRecord(
        student_id=student_id,
        question_id=question_id,
        correct=correct,
        difficulty=difficulty,
        knowledge_raw=knowledge_raw,
        ability_raw=ability_raw,
        duration=duration,
    )


def make_clean(student_id="s1", question_id="q1", correct=1, difficulty=1,
               knowledge=KnowledgeArea.SPEED_AND_TIME,
               ability=AbilityDomain.COMPUTATIONAL, duration=10.0) -> CleanAttempt:
    return CleanAttempt(
        student_id=student_id,
        question_id=question_id,
        correct=correct,
        difficulty=difficulty,
        knowledge=knowledge,
        ability=ability,
        duration=duration,
    )


def attempts_with_accuracy(student_id, n_correct, n_total, difficulty=1,
                           knowledge=KnowledgeArea.SPEED_AND_TIME,
                           ability=AbilityDomain.COMPUTATIONAL,
                           duration=10.0, prefix="q"):
    """n_total attempts at one difficulty, exactly n_correct of them correct."""
    rows = []
    for i in range(n_total):
        rows.append(make_clean(
            student_id=student_id,
            question_id=f"{prefix}{difficulty}_{i}",
            correct=1 if i < n_correct else 0,
            difficulty=difficulty,
            knowledge=knowledge,
            ability=ability,
            duration=duration,
        ))
    return rows


def random_clean_cohort(rng: random.Random, n_students: int, attempts_per_student=30):
    """Unstructured random cohort for oracle-equivalence style tests."""
    rows = []
    for s in range(n_students):
        sid = f"r{s:04d}"
        for q in range(attempts_per_student):
            rows.append(make_clean(
                student_id=sid,
                question_id=f"q{q:04d}",
                correct=rng.randint(0, 1),
                difficulty=rng.randint(1, 3),
                knowledge=rng.choice(AREAS),
                ability=rng.choice(DOMAINS),
                duration=rng.uniform(1.0, 120.0),
            ))
    return rows


def random_valid_tagset(rng: random.Random) -> TagSet:
    """Random vector respecting the mutual-exclusion invariants."""
    chosen: list[TagId] = []
    for d in (1, 2, 3):
        pick = rng.choice([None, 0, 3, 6, 9])
        if pick is not None:
            chosen.append(TagId[f"Tag_1_{d + pick}"])
    for i in range(1, 6):
        pick = rng.choice([None, i, i + 5])
        if pick is not None:
            chosen.append(TagId[f"Tag_2_{pick}"])
    for i in range(1, 7):
        pick = rng.choice([None, i, i + 6])
        if pick is not None:
            chosen.append(TagId[f"Tag_3_{pick}"])
    return TagSet.from_tags(chosen)


@st.composite
def valid_tagsets(draw) -> TagSet:
    chosen: list[TagId] = []
    for d in (1, 2, 3):
        pick = draw(st.sampled_from([None, 0, 3, 6, 9]))
        if pick is not None:
            chosen.append(TagId[f"Tag_1_{d + pick}"])
    for i in range(1, 6):
        pick = draw(st.sampled_from([None, i, i + 5]))
        if pick is not None:
            chosen.append(TagId[f"Tag_2_{pick}"])
    for i in range(1, 7):
        pick = draw(st.sampled_from([None, i, i + 6]))
        if pick is not None:
            chosen.append(TagId[f"Tag_3_{pick}"])
    return TagSet.from_tags(chosen)


@pytest.fixture
def cfg() -> PipelineConfig:
    return PipelineConfig()


@pytest.fixture
def all_tags():
    return list(ORDERED_TAGS)
