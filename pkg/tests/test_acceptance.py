"""End-to-end acceptance suite.

Each test class pins one externally stated guarantee of the pipeline:
taxonomy contents, cleaning semantics, threshold boundaries, peer-relative
speed splits, whole-engine oracle equivalence, planted-profile recovery,
prompt structure, wire-level decoding parameters, deterministic outputs,
and survey statistics.
"""

import json
import random
import time

import pytest

from conftest import make_attempt, make_clean, random_valid_tagset
from naive_rules import naive_box_summary, naive_speed, naive_tags
from test_gateway import StubServer
from tagfeedback.cli import main as cli_main
from tagfeedback.evalstats import SurveyResponse, filter_responses, summarize
from tagfeedback.gateway import CompletionParams, HttpBackend, complete
from tagfeedback.ingest import REQUIRED_COLUMNS, write_attempts_csv
from tagfeedback.model import (
    ORDERED_TAGS,
    AbilityDomain,
    KnowledgeArea,
    TagCategory,
    TagId,
    TagSet,
    tag_description,
)
from tagfeedback.preprocess import apply_mapping, dedup_attempts, default_category_mapping
from tagfeedback.promptgen import SECTION_NAMES, render_prompt
from tagfeedback.synth import CohortSpec, LatentProfile, draw_profiles, generate_cohort
from tagfeedback.tagger import SpeedClass, aggregate, classify_speed, tag_cohort

# ---------------------------------------------------------------------------
# 1. Taxonomy: 34 tags, 12/10/12 partition, byte-equal descriptions.
# The table below is frozen in this file on purpose: the package must match
# it, not the other way round.
# ---------------------------------------------------------------------------

GOLDEN_DESCRIPTIONS = {
    "Tag_1_1": "Correctly and quickly on easy questions.",
    "Tag_1_2": "Correctly and quickly on medium difficulty questions.",
    "Tag_1_3": "Correctly and quickly on difficult questions.",
    "Tag_1_4": "Correctly but completed slowly on easy questions.",
    "Tag_1_5": "Correctly but completed slowly on medium difficulty questions.",
    "Tag_1_6": "Correctly but completed slowly on difficult questions.",
    "Tag_1_7": "Incorrectly but completed quickly on easy questions.",
    "Tag_1_8": "Answered incorrectly but quickly on medium difficulty questions.",
    "Tag_1_9": "Incorrectly but completed quickly on difficult questions.",
    "Tag_1_10": "Incorrectly but completed slowly on easy questions.",
    "Tag_1_11": "Incorrectly but completed slowly on medium difficulty questions.",
    "Tag_1_12": "Incorrectly but completed slowly on difficult questions.",
    "Tag_2_1": "Outstanding performance in calculations speed and time.",
    "Tag_2_2": "Outstanding in the identification and geometric shapes.",
    "Tag_2_3": "Outstanding in data statistics and probability problems.",
    "Tag_2_4": "Outstanding in algebraic equations and functions.",
    "Tag_2_5": "Outstanding in arithmetic operations and properties.",
    "Tag_2_6": "Struggling with calculations involving speed and time.",
    "Tag_2_7": "Struggling to recognize and work with geometric shapes.",
    "Tag_2_8": "Finding data statistics and probability problems challenging.",
    "Tag_2_9": "Struggling with algebraic equations and functions.",
    "Tag_2_10": "Struggling with arithmetic operations and properties.",
    "Tag_3_1": "Strong capabilities in practical application of mathematics.",
    "Tag_3_2": "Strong capabilities in statistical analysis.",
    "Tag_3_3": "Strong computational skills.",
    "Tag_3_4": "Strong geometric thinking skills.",
    "Tag_3_5": "Strong logical reasoning skills.",
    "Tag_3_6": "Strong innovative and abstract thinking skills.",
    "Tag_3_7": "Challenged by the practical application of mathematics.",
    "Tag_3_8": "Challenged by statistical analysis.",
    "Tag_3_9": "Challenged by computational skills.",
    "Tag_3_10": "Challenged by geometric thinking skills.",
    "Tag_3_11": "Challenged by logical reasoning.",
    "Tag_3_12": "Challenged by innovative and abstract thinking.",
}


class TestTaxonomyGolden:
    def test_exactly_34_tags_partitioned_12_10_12(self):
        assert len(ORDERED_TAGS) == 34
        counts = {cat: 0 for cat in TagCategory}
        for tag in ORDERED_TAGS:
            counts[tag.category] += 1
        assert counts[TagCategory.BASIC] == 12
        assert counts[TagCategory.KNOWLEDGE] == 10
        assert counts[TagCategory.ABILITY] == 12

    def test_descriptions_byte_equal_to_golden_table(self):
        assert {t.name for t in ORDERED_TAGS} == set(GOLDEN_DESCRIPTIONS)
        for tag in ORDERED_TAGS:
            assert tag_description(tag) == GOLDEN_DESCRIPTIONS[tag.name], tag.name


# ---------------------------------------------------------------------------
# 2. Cleaning rules on bulk randomized input: max-duration retention,
# zero-duration removal, idempotence. 10k records under one second.
# ---------------------------------------------------------------------------


class TestCleaningBulk:
    def test_ten_thousand_records_under_one_second(self):
        rng = random.Random(20260817)
        rows = []
        for _ in range(10_000):
            duration = rng.choice([0.0, 0.0, rng.uniform(0.5, 300.0),
                                   round(rng.uniform(1, 50), 1)])
            rows.append(make_attempt(
                student_id=f"s{rng.randint(1, 300)}",
                question_id=f"q{rng.randint(1, 40)}",
                correct=rng.randint(0, 1),
                duration=duration,
            ))

        start = time.perf_counter()
        once = dedup_attempts(rows)
        twice = dedup_attempts(once)
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0

        assert twice == once
        assert all(r.duration > 0 for r in once)
        pairs = [(r.student_id, r.question_id) for r in once]
        assert len(pairs) == len(set(pairs))

        best: dict = {}
        nonzero_pairs = set()
        for r in rows:
            key = (r.student_id, r.question_id)
            if r.duration > 0:
                nonzero_pairs.add(key)
                if key not in best or r.duration > best[key]:
                    best[key] = r.duration
        assert set(pairs) == nonzero_pairs
        for r in once:
            assert r.duration == best[(r.student_id, r.question_id)]


# ---------------------------------------------------------------------------
# 3. Threshold boundaries. Accuracies are built as exact attempt fractions:
# 110/200 sits exactly on the struggling boundary, 130/200 exactly on the
# adequate one, and +-1 correct answer steps across each boundary.
# ---------------------------------------------------------------------------


def cohort_with_target_accuracy(n_correct, n_total, fast=True, difficulty=2,
                                area=KnowledgeArea.SPEED_AND_TIME,
                                domain=AbilityDomain.COMPUTATIONAL):
    """Two students; the peer pins the target's speed class via the median split."""
    rows = []
    target_duration = 10.0 if fast else 90.0
    for i in range(n_total):
        rows.append(make_clean(
            student_id="target", question_id=f"t{i}",
            correct=1 if i < n_correct else 0,
            difficulty=difficulty, knowledge=area, ability=domain,
            duration=target_duration,
        ))
    for i in range(n_total):
        rows.append(make_clean(
            student_id="peer", question_id=f"p{i}", correct=1,
            difficulty=difficulty, knowledge=area, ability=domain,
            duration=50.0,
        ))
    return rows


class TestThresholdBoundaries:
    @pytest.mark.parametrize("n_correct,n_total,fast,expected", [
        (131, 200, True, TagId.Tag_1_2),    # just above adequate, fast
        (131, 200, False, TagId.Tag_1_5),   # just above adequate, slow
        (130, 200, True, None),             # exactly the adequate boundary
        (130, 200, False, None),
        (129, 200, True, None),             # middle band
        (111, 200, True, None),             # just above struggling: still middle
        (110, 200, True, None),             # exactly the struggling boundary
        (110, 200, False, None),
        (109, 200, True, TagId.Tag_1_8),    # just below struggling, fast
        (109, 200, False, TagId.Tag_1_11),  # just below struggling, slow
    ])
    def test_performance_boundaries(self, n_correct, n_total, fast, expected):
        rows = cohort_with_target_accuracy(n_correct, n_total, fast=fast)
        tags = tag_cohort(rows)["target"]
        perf = [t for t in tags.set_tags() if t.category is TagCategory.BASIC]
        if expected is None:
            assert perf == []
        else:
            assert perf == [expected]

    @pytest.mark.parametrize("n_correct,n_total,expected", [
        (131, 200, TagId.Tag_2_1),
        (130, 200, None),
        (129, 200, None),
        (111, 200, None),
        (110, 200, None),
        (109, 200, TagId.Tag_2_6),
    ])
    def test_knowledge_boundaries(self, n_correct, n_total, expected):
        rows = cohort_with_target_accuracy(n_correct, n_total)
        tags = tag_cohort(rows)["target"]
        knowledge = [t for t in tags.set_tags() if t.category is TagCategory.KNOWLEDGE]
        if expected is None:
            assert knowledge == []
        else:
            assert knowledge == [expected]

    @pytest.mark.parametrize("n_correct,n_total,expected", [
        (131, 200, TagId.Tag_3_3),
        (130, 200, None),
        (110, 200, None),
        (109, 200, TagId.Tag_3_9),
    ])
    def test_ability_boundaries(self, n_correct, n_total, expected):
        rows = cohort_with_target_accuracy(n_correct, n_total)
        tags = tag_cohort(rows)["target"]
        ability = [t for t in tags.set_tags() if t.category is TagCategory.ABILITY]
        if expected is None:
            assert ability == []
        else:
            assert ability == [expected]

    def test_small_exact_fractions(self):
        # 11/20 and 13/20 are the boundary values on a 20-attempt sample
        for n_correct, expected in [(11, []), (13, []), (14, [TagId.Tag_2_1]),
                                    (10, [TagId.Tag_2_6])]:
            rows = cohort_with_target_accuracy(n_correct, 20)
            tags = tag_cohort(rows)["target"]
            knowledge = [t for t in tags.set_tags() if t.category is TagCategory.KNOWLEDGE]
            assert knowledge == expected, f"{n_correct}/20"


# ---------------------------------------------------------------------------
# 4. Speed rule vs a brute-force rank oracle, 200 random cohorts:
# sizes 2..40 use the median split (never Neither); 41+ tag only the
# extreme quarter each way.
# ---------------------------------------------------------------------------


class TestSpeedRuleOracle:
    def _run_cohort(self, rng, n, cfg):
        durations = {}
        rows = []
        grid = [round(rng.uniform(1, 60), 0) for _ in range(max(3, n // 3))]
        for i in range(n):
            sid = f"s{i:03d}"
            # mix continuous values with a coarse grid so mean-duration ties occur
            dur = rng.choice(grid) if rng.random() < 0.4 else rng.uniform(1.0, 120.0)
            durations[sid] = dur
            rows.append(make_clean(student_id=sid, question_id="q0", duration=dur))
        got = classify_speed(aggregate(rows), 1, cfg)
        expected = naive_speed(durations, cutoff=cfg.speed_cohort_cutoff,
                               fraction=cfg.speed_extreme_fraction)
        assert {sid: c.value for sid, c in got.items()} == expected
        return got

    def test_median_split_cohorts(self, cfg):
        rng = random.Random(404)
        for trial in range(100):
            n = rng.randint(2, 40)
            got = self._run_cohort(rng, n, cfg)
            values = list(got.values())
            assert SpeedClass.NEITHER not in values
            assert values.count(SpeedClass.FAST) == -(-n // 2)  # ceil
            assert values.count(SpeedClass.SLOW) == n // 2

    def test_extreme_split_cohorts(self, cfg):
        rng = random.Random(505)
        for trial in range(100):
            n = rng.randint(41, 160)
            got = self._run_cohort(rng, n, cfg)
            values = list(got.values())
            k = -(-n // 4)  # ceil(0.25 * n)
            assert values.count(SpeedClass.FAST) == k
            assert values.count(SpeedClass.SLOW) == k
            assert values.count(SpeedClass.NEITHER) == n - 2 * k
            assert n - 2 * k > 0

    def test_frozen_41_student_cohort(self, cfg):
        rows = [make_clean(student_id=f"s{i:02d}", question_id="q0", duration=float(i))
                for i in range(1, 42)]
        got = classify_speed(aggregate(rows), 1, cfg)
        fast = {s for s, c in got.items() if c is SpeedClass.FAST}
        slow = {s for s, c in got.items() if c is SpeedClass.SLOW}
        assert fast == {f"s{i:02d}" for i in range(1, 12)}
        assert slow == {f"s{i:02d}" for i in range(31, 42)}


# ---------------------------------------------------------------------------
# 5. Whole-engine oracle equivalence on 500 synthetic students.
# ---------------------------------------------------------------------------


class TestEngineOracleEquivalence:
    def test_500_students_full_agreement_under_five_seconds(self):
        rng = random.Random(8844)
        profiles = []
        for i in range(500):
            profiles.append(LatentProfile(
                student_id=f"s{i:04d}",
                knowledge_probs={k: rng.random() for k in KnowledgeArea},
                ability_probs={a: rng.random() for a in AbilityDomain},
                duration_log_mean={1: 2.2 + rng.uniform(-0.5, 0.5),
                                   2: 2.8 + rng.uniform(-0.5, 0.5),
                                   3: 3.2 + rng.uniform(-0.5, 0.5)},
                duration_log_sd={1: 0.5, 2: 0.5, 3: 0.5},
                attempts_per_dimension=6,
            ))
        raw = generate_cohort(profiles, seed=404, duplicate_rate=0.25, zero_rate=0.08)
        clean, unmapped = apply_mapping(dedup_attempts(raw), default_category_mapping())
        assert unmapped.excluded == 0

        start = time.perf_counter()
        engine = {sid: frozenset(t.name for t in ts.set_tags())
                  for sid, ts in tag_cohort(clean).items()}
        oracle = naive_tags(clean)
        elapsed = time.perf_counter() - start

        assert len(engine) == 500
        assert engine == oracle
        assert elapsed < 5.0


# ---------------------------------------------------------------------------
# 6. Planted-profile recovery: extreme latent probabilities with 20
# attempts per dimension must surface the matching tag for at least 95%
# of (student, dimension) pairs.
# ---------------------------------------------------------------------------


class TestPlantedProfileRecovery:
    def test_recovery_rate_at_least_95_percent(self):
        spec = CohortSpec(n_students=100, seed=900, attempts_per_dimension=20,
                          strong_fraction=0.5)
        profiles = draw_profiles(spec)
        raw = generate_cohort(profiles, seed=spec.seed,
                              duplicate_rate=spec.duplicate_rate,
                              zero_rate=spec.zero_rate)
        clean, _ = apply_mapping(dedup_attempts(raw), default_category_mapping())
        tags = tag_cohort(clean)

        knowledge_order = list(KnowledgeArea)
        ability_order = list(AbilityDomain)
        hits = 0
        total = 0
        for profile in profiles:
            ts = tags[profile.student_id]
            for i, area in enumerate(knowledge_order, start=1):
                strong = profile.knowledge_probs[area] >= 0.9
                wanted = TagId[f"Tag_2_{i}"] if strong else TagId[f"Tag_2_{i + 5}"]
                total += 1
                hits += ts[wanted]
            for i, domain in enumerate(ability_order, start=1):
                strong = profile.ability_probs[domain] >= 0.9
                wanted = TagId[f"Tag_3_{i}"] if strong else TagId[f"Tag_3_{i + 6}"]
                total += 1
                hits += ts[wanted]

        assert total == 100 * 11
        assert hits / total >= 0.95


# ---------------------------------------------------------------------------
# 7. Prompt structure across 1000 random valid tag vectors.
# ---------------------------------------------------------------------------


class TestPromptStructureBulk:
    def test_1000_random_tagsets(self):
        rng = random.Random(321)
        header_needles = [f"## {name}" for name in SECTION_NAMES]
        for _ in range(1000):
            ts = random_valid_tagset(rng)
            prompt = render_prompt(ts)
            positions = [prompt.find(needle) for needle in header_needles]
            assert all(p >= 0 for p in positions)
            assert positions == sorted(positions)
            set_tags = set(ts.set_tags())
            for tag in ORDERED_TAGS:
                if tag in set_tags:
                    assert tag_description(tag) in prompt
                else:
                    assert tag_description(tag) not in prompt


# ---------------------------------------------------------------------------
# 8. Wire parameters under default configuration, captured on the socket.
# ---------------------------------------------------------------------------


class TestWireParameters:
    def test_request_body_carries_exact_decoding_parameters(self):
        with StubServer() as stub:
            backend = HttpBackend(stub.url, api_key="sk-acceptance")
            result = complete("wire check prompt", backend=backend)
        assert result.text == "stub completion text"
        assert len(stub.bodies) == 1
        body = stub.bodies[0]

        sent = json.loads(body)
        assert sent["temperature"] == 0.4
        assert sent["max_tokens"] == 1000
        assert sent["top_p"] == 1
        assert sent["frequency_penalty"] == 0
        assert sent["presence_penalty"] == 0
        assert sent["messages"] == [{"role": "user", "content": "wire check prompt"}]

        # byte-level golden check, delimiters included (keys are sorted)
        assert b'"frequency_penalty": 0, "max_tokens": 1000, "messages"' in body
        assert b'"presence_penalty": 0, "temperature": 0.4, "top_p": 1}' in body

    def test_default_params_object_matches(self):
        p = CompletionParams()
        assert (p.temperature, p.max_tokens, p.top_p,
                p.frequency_penalty, p.presence_penalty) == (0.4, 1000, 1, 0, 0)


# ---------------------------------------------------------------------------
# 9. End-to-end determinism: tag + mock reports, run twice, byte-identical.
# ---------------------------------------------------------------------------


class TestEndToEndDeterminism:
    def test_two_runs_byte_identical_reports(self, tmp_path):
        cohort_csv = tmp_path / "cohort.csv"
        assert cli_main(["synth", "--out", str(cohort_csv), "--students", "8",
                         "--seed", "42", "--attempts-per-dimension", "8"]) == 0

        outputs = []
        for run in ("one", "two"):
            tag_csv = tmp_path / f"tags_{run}.csv"
            report_dir = tmp_path / f"reports_{run}"
            assert cli_main(["tag", "--input", str(cohort_csv),
                             "--out", str(tag_csv)]) == 0
            assert cli_main(["report", "--tags", str(tag_csv), "--all",
                             "--backend", "mock", "--out-dir", str(report_dir)]) == 0
            outputs.append((tag_csv.read_bytes(), sorted(report_dir.glob("*.md"))))

        (tags_a, reports_a), (tags_b, reports_b) = outputs
        assert tags_a == tags_b
        assert [p.name for p in reports_a] == [p.name for p in reports_b]
        assert len(reports_a) == 8
        for path_a, path_b in zip(reports_a, reports_b):
            assert path_a.read_bytes() == path_b.read_bytes()

    def test_report_for_known_student_id(self, tmp_path):
        flags = ["0"] * 34
        flags[0] = "1"
        tag_csv = tmp_path / "student_tag.csv"
        tag_csv.write_text("2965," + ",".join(flags) + "\n", encoding="utf-8")
        out_dir = tmp_path / "reports"
        assert cli_main(["report", "--tags", str(tag_csv), "--students", "2965",
                         "--backend", "mock", "--out-dir", str(out_dir)]) == 0
        md = (out_dir / "report_2965.md").read_text(encoding="utf-8")
        assert md.count("## ") == 6


# ---------------------------------------------------------------------------
# 10. Survey filtering on the reconstructed 63-response fixture, and
# summary statistics vs the brute-force oracle on random fixtures.
# ---------------------------------------------------------------------------


def survey_fixture_63():
    """28 all-perfect + 3 below the low threshold + 32 mixed = 63 responses."""
    rng = random.Random(6363)
    responses = []
    for i in range(28):
        responses.append(SurveyResponse(f"perfect{i:02d}", (10,) * 5))
    for i, total in enumerate([2, 4, 5]):
        scores = [0, 0, 0, 0, 0]
        for _ in range(total):
            scores[rng.randint(0, 4)] += 1
        responses.append(SurveyResponse(f"low{i}", tuple(scores)))
    for i in range(32):
        first_four = [rng.randint(0, 10) for _ in range(4)]
        t4 = sum(first_four)
        last = rng.randint(max(0, 6 - t4), min(10, 49 - t4))
        responses.append(SurveyResponse(f"mixed{i:02d}", (*first_four, last)))
    rng.shuffle(responses)
    return responses


class TestSurveyAcceptance:
    def test_63_fixture_partitions_32_3_28(self):
        responses = survey_fixture_63()
        assert len(responses) == 63
        result = filter_responses(responses, low_total_threshold=5)
        assert result.counts() == (32, 3, 28)

    def test_cli_counts_line_on_63_fixture(self, tmp_path, capsys):
        responses = survey_fixture_63()
        lines = ["respondent_id,u,p,m,c,o,advice"]
        for r in responses:
            lines.append(",".join([r.respondent_id, *map(str, r.scores), ""]))
        survey_csv = tmp_path / "survey.csv"
        survey_csv.write_text("\n".join(lines) + "\n", encoding="utf-8")
        assert cli_main(["eval-stats", "--input", str(survey_csv),
                         "--out", str(tmp_path / "summary.csv")]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "valid=32 low=3 perfect=28"

    def test_summaries_match_oracle_on_100_random_fixtures(self):
        rng = random.Random(777)
        for trial in range(100):
            n = rng.randint(1, 40)
            responses = [
                SurveyResponse(f"r{i}", tuple(rng.randint(0, 10) for _ in range(5)))
                for i in range(n)
            ]
            summaries = summarize(responses)
            for dim_index, (dim, summary) in enumerate(summaries.items()):
                values = [r.scores[dim_index] for r in responses]
                oracle = naive_box_summary(values)
                assert summary.mean == pytest.approx(oracle["mean"])
                assert summary.median == oracle["median"]
                assert (summary.q1, summary.q3) == (oracle["q1"], oracle["q3"])
                assert (summary.whisker_low, summary.whisker_high) == (
                    oracle["whisker_low"], oracle["whisker_high"])
                assert summary.outliers == oracle["outliers"]
