"""Seeded synthetic cohorts with known ground-truth profiles.

The school dataset is private, so tag-engine behavior is exercised against
generated cohorts instead: each student carries planted per-area and
per-domain correctness probabilities (an attempt touching area k and domain
a succeeds with the mean of the two planted values) and per-difficulty
log-normal duration parameters. Injected noise rows (shorter duplicate
attempts, zero-duration rows) exercise the cleaning rules without disturbing
the planted ground truth, because they always lose the max-duration
selection.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import AbilityDomain, AttemptRecord, KnowledgeArea
from .preprocess import DEFAULT_ABILITY_MAP, DEFAULT_KNOWLEDGE_MAP, load_mapping_file

DIFFICULTIES = (1, 2, 3)


def _label_pools():
    """Raw labels per consolidated category, taken from the bundled mapping."""
    kmap, _ = load_mapping_file(DEFAULT_KNOWLEDGE_MAP, KnowledgeArea)
    amap, _ = load_mapping_file(DEFAULT_ABILITY_MAP, AbilityDomain)
    know: dict[KnowledgeArea, list[str]] = {area: [] for area in KnowledgeArea}
    abil: dict[AbilityDomain, list[str]] = {domain: [] for domain in AbilityDomain}
    for raw, area in kmap.items():
        know[area].append(raw)
    for raw, domain in amap.items():
        abil[domain].append(raw)
    return know, abil


@dataclass(frozen=True)
class LatentProfile:
    """Ground-truth skill and speed parameters for one synthetic student."""

    student_id: str
    knowledge_probs: dict  # KnowledgeArea -> correctness probability
    ability_probs: dict  # AbilityDomain -> correctness probability
    duration_log_mean: dict  # difficulty -> mean of log duration
    duration_log_sd: dict  # difficulty -> sd of log duration
    attempts_per_dimension: int = 20

    def __post_init__(self):
        if set(self.knowledge_probs) != set(KnowledgeArea):
            raise ValueError("knowledge_probs must cover every knowledge area")
        if set(self.ability_probs) != set(AbilityDomain):
            raise ValueError("ability_probs must cover every ability domain")
        for p in list(self.knowledge_probs.values()) + list(self.ability_probs.values()):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"correctness probability out of [0, 1]: {p}")
        for d in DIFFICULTIES:
            if d not in self.duration_log_mean or d not in self.duration_log_sd:
                raise ValueError(f"duration parameters missing difficulty {d}")
        for sd in self.duration_log_sd.values():
            if sd <= 0:
                raise ValueError(f"duration spread must be positive, got {sd}")
        if self.attempts_per_dimension < 1:
            raise ValueError("attempts_per_dimension must be >= 1")


@dataclass(frozen=True)
class CohortSpec:
    """Distribution a cohort of LatentProfiles is drawn from."""

    n_students: int = 100
    seed: int = 7
    attempts_per_dimension: int = 20
    strong_fraction: float = 0.5
    strong_low: float = 0.9
    strong_high: float = 0.98
    weak_low: float = 0.12
    weak_high: float = 0.28
    duration_log_mean: dict = field(default_factory=lambda: {1: 2.4, 2: 2.9, 3: 3.3})
    duration_log_sd: float = 0.5
    student_speed_sd: float = 0.4
    duplicate_rate: float = 0.2
    zero_rate: float = 0.05


def draw_profiles(spec: CohortSpec) -> list[LatentProfile]:
    """Draw one profile per student; strong students first, then weak."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=spec.seed, spawn_key=(0,)))
    n_strong = round(spec.n_students * spec.strong_fraction)
    profiles = []
    for i in range(spec.n_students):
        lo, hi = (spec.strong_low, spec.strong_high) if i < n_strong else (spec.weak_low, spec.weak_high)
        offset = rng.normal(0.0, spec.student_speed_sd)
        profiles.append(
            LatentProfile(
                student_id=f"s{i + 1:04d}",
                knowledge_probs={area: float(rng.uniform(lo, hi)) for area in KnowledgeArea},
                ability_probs={domain: float(rng.uniform(lo, hi)) for domain in AbilityDomain},
                duration_log_mean={d: spec.duration_log_mean[d] + offset for d in DIFFICULTIES},
                duration_log_sd={d: spec.duration_log_sd for d in DIFFICULTIES},
                attempts_per_dimension=spec.attempts_per_dimension,
            )
        )
    return profiles


def _plan(profile: LatentProfile):
    """Deterministic attempt plan covering every (area, domain) pair evenly.

    Each pair gets ceil(m/5) attempts, so every area receives >= m attempts
    and every domain exactly 5*ceil(m/5) >= m; difficulty cycles over the
    whole sequence.
    """
    per_pair = math.ceil(profile.attempts_per_dimension / len(KnowledgeArea))
    diff_cycle = itertools.cycle(DIFFICULTIES)
    for area, domain in itertools.product(KnowledgeArea, AbilityDomain):
        for _ in range(per_pair):
            yield area, domain, next(diff_cycle)


def generate_student(profile: LatentProfile, rng, duplicate_rate=0.2, zero_rate=0.05,
                     label_pools=None) -> list[AttemptRecord]:
    know_pool, abil_pool = label_pools or _label_pools()
    records: list[AttemptRecord] = []
    for idx, (area, domain, difficulty) in enumerate(_plan(profile)):
        p = (profile.knowledge_probs[area] + profile.ability_probs[domain]) / 2
        duration = float(rng.lognormal(profile.duration_log_mean[difficulty],
                                       profile.duration_log_sd[difficulty]))
        kpool = know_pool[area]
        apool = abil_pool[domain]
        base = dict(
            student_id=profile.student_id,
            question_id=f"q{idx:04d}",
            difficulty=difficulty,
            knowledge_raw=kpool[idx % len(kpool)],
            ability_raw=apool[idx % len(apool)],
        )
        real = AttemptRecord(correct=int(rng.random() < p), duration=duration, **base)

        noise: list[AttemptRecord] = []
        if rng.random() < duplicate_rate:
            noise.append(
                AttemptRecord(correct=int(rng.random() < p),
                              duration=duration * float(rng.uniform(0.2, 0.8)), **base)
            )
        if rng.random() < zero_rate:
            noise.append(AttemptRecord(correct=int(rng.random() < p), duration=0.0, **base))
        # noise rows may precede or follow the genuine attempt
        if noise and rng.random() < 0.5:
            records.extend(noise)
            records.append(real)
        else:
            records.append(real)
            records.extend(noise)
    return records


def generate_cohort(profiles, seed: int, duplicate_rate=0.2, zero_rate=0.05) -> list[AttemptRecord]:
    """Generate raw attempts for every profile; bit-stable for a given seed."""
    pools = _label_pools()
    records: list[AttemptRecord] = []
    for i, profile in enumerate(profiles):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1, i)))
        records.extend(
            generate_student(profile, rng, duplicate_rate=duplicate_rate,
                             zero_rate=zero_rate, label_pools=pools)
        )
    return records


def generate_from_spec(spec: CohortSpec) -> list[AttemptRecord]:
    return generate_cohort(draw_profiles(spec), seed=spec.seed,
                           duplicate_rate=spec.duplicate_rate, zero_rate=spec.zero_rate)


_SPEC_FLOAT_KEYS = {
    "strong_fraction", "strong_low", "strong_high", "weak_low", "weak_high",
    "duration_log_sd", "student_speed_sd", "duplicate_rate", "zero_rate",
}
_SPEC_INT_KEYS = {"n_students", "seed", "attempts_per_dimension"}


def load_cohort_spec(path) -> CohortSpec:
    """Read a cohort spec from a flat key-value file; all keys optional."""
    kwargs: dict = {}
    durations: dict[int, float] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        is_duration = key.startswith("duration_log_mean_") and key.rsplit("_", 1)[1].isdigit()
        if key not in _SPEC_INT_KEYS and key not in _SPEC_FLOAT_KEYS and not is_duration:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key in _SPEC_INT_KEYS:
                kwargs[key] = int(value)
            elif key in _SPEC_FLOAT_KEYS:
                kwargs[key] = float(value)
            else:
                durations[int(key.rsplit("_", 1)[1])] = float(value)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    if durations:
        base = dict(CohortSpec().duration_log_mean)
        base.update(durations)
        kwargs["duration_log_mean"] = base
    return CohortSpec(**kwargs)
