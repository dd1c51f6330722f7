"""Command-line entry point for the pipeline stages.

Subcommands: ingest-check, tag, report, eval-stats, synth. Errors are
emitted as one JSON object on stderr with distinct exit codes: 2 usage,
3 missing input file, 4 configuration/validation problem, 5 runtime failure
(including partial batch failures).
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

from . import evalstats, synth
from .gateway import CompletionParams, GatewayError, HttpBackend, MockBackend, RetryPolicy
from .ingest import MissingColumnError, parse_attempts, write_attempts_csv
from .model import ConfigError, PipelineConfig, load_config, validate_config
from .preprocess import (
    DEFAULT_ABILITY_MAP,
    DEFAULT_KNOWLEDGE_MAP,
    EmptyMappingError,
    MappingFormatError,
    apply_mapping,
    dedup_attempts,
    load_category_mapping,
)
from .promptgen import TemplateError, load_tag_table, load_template
from .report import generate_batch, report_filename
from .tagger import tag_cohort, write_tag_table

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_CONFIG = 4
EXIT_RUNTIME = 5


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_RUNTIME, **extra):
        self.message = message
        self.code = code
        self.extra = extra
        super().__init__(message)


def _fail(message: str, code: int, **extra) -> "CliError":
    return CliError(message, code, **extra)


def _emit_error(err: CliError):
    payload = {"error": err.message, "exit_code": err.code, **err.extra}
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True), file=sys.stderr)


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise _fail(f"{what} not found: {path}", EXIT_MISSING_FILE, path=str(path))
    return p


def _load_cfg(args) -> PipelineConfig:
    if getattr(args, "config", None):
        _require_file(args.config, "config file")
        try:
            return load_config(args.config)
        except ConfigError as exc:
            raise _fail("invalid configuration", EXIT_CONFIG, problems=exc.errors)
    return PipelineConfig()


def _compute_tags(input_path: str, kmap_path: str | None, amap_path: str | None, cfg: PipelineConfig):
    """Raw attempts file + mappings -> (tags per student, stage summaries)."""
    _require_file(input_path, "attempts file")
    kmap = kmap_path or cfg.knowledge_mapping or str(DEFAULT_KNOWLEDGE_MAP)
    amap = amap_path or cfg.ability_mapping or str(DEFAULT_ABILITY_MAP)
    _require_file(kmap, "knowledge mapping file")
    _require_file(amap, "ability mapping file")

    try:
        records, ingest_report = parse_attempts(input_path)
    except MissingColumnError as exc:
        raise _fail(str(exc), EXIT_CONFIG)
    try:
        mapping, warnings = load_category_mapping(kmap, amap)
    except MappingFormatError as exc:
        raise _fail(str(exc), EXIT_CONFIG)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)

    deduped = dedup_attempts(records)
    try:
        clean, unmapped = apply_mapping(deduped, mapping)
    except EmptyMappingError as exc:
        raise _fail(str(exc), EXIT_CONFIG)
    tags = tag_cohort(clean, cfg)
    return tags, ingest_report, len(deduped), unmapped


def cmd_ingest_check(args) -> int:
    _require_file(args.input, "attempts file")
    try:
        records, report = parse_attempts(args.input)
    except MissingColumnError as exc:
        raise _fail(str(exc), EXIT_CONFIG)
    print(f"accepted={report.accepted} rejected={report.rejected}")
    for line_no, reason in report.reasons[: args.max_reasons]:
        print(f"  line {line_no}: {reason}")
    if report.rejected > len(report.reasons[: args.max_reasons]):
        print(f"  ... {report.rejected - args.max_reasons} more")
    if report.rejected:
        raise _fail(
            f"{report.rejected} of {report.accepted + report.rejected} rows rejected",
            EXIT_RUNTIME,
            accepted=report.accepted,
            rejected=report.rejected,
        )
    return EXIT_OK


def cmd_tag(args) -> int:
    cfg = _load_cfg(args)
    try:
        validate_config(cfg)
    except ConfigError as exc:
        raise _fail("invalid configuration", EXIT_CONFIG, problems=exc.errors)
    tags, ingest_report, retained, unmapped = _compute_tags(args.input, args.mapping_k, args.mapping_a, cfg)
    write_tag_table(tags, args.out)
    print(
        f"students={len(tags)} attempts_in={ingest_report.accepted} "
        f"rejected_rows={ingest_report.rejected} retained={retained} "
        f"unmapped_excluded={unmapped.excluded}"
    )
    for dimension, label, count in unmapped.items():
        print(f"  unmapped {dimension} label {label!r} x{count}", file=sys.stderr)
    print(f"wrote {args.out}")
    return EXIT_OK


def _build_backend(args, cfg: PipelineConfig):
    if args.backend == "mock":
        return MockBackend()
    gw = cfg.gateway
    endpoint = args.endpoint or gw.endpoint
    if not endpoint:
        raise _fail("http backend needs an endpoint (flag --endpoint or config key 'endpoint')", EXIT_CONFIG)
    try:
        return HttpBackend(endpoint, api_key_env=gw.api_key_env, timeout=gw.timeout)
    except GatewayError as exc:
        raise _fail(str(exc), EXIT_CONFIG)


def cmd_report(args) -> int:
    cfg = _load_cfg(args)
    if args.tags:
        _require_file(args.tags, "tag dataset")
        tag_table = load_tag_table(args.tags)
    elif args.input:
        tag_table, _, _, _ = _compute_tags(args.input, args.mapping_k, args.mapping_a, cfg)
    else:
        raise _fail("provide --tags or --input", EXIT_USAGE)

    if args.students:
        requested = [s for chunk in args.students for s in chunk.split(",") if s]
    elif args.all:
        requested = sorted(tag_table)
    else:
        raise _fail("provide --students or --all", EXIT_USAGE)

    template = None
    if args.template:
        _require_file(args.template, "template file")
        try:
            template = load_template(args.template)
        except TemplateError as exc:
            raise _fail("invalid template", EXIT_CONFIG, problems=exc.problems)

    backend = _build_backend(args, cfg)
    params = CompletionParams(model=args.model or cfg.gateway.model)
    retry = RetryPolicy(max_attempts=cfg.gateway.max_attempts, base_delay=cfg.gateway.base_delay,
                        max_delay=cfg.gateway.max_delay)
    result = generate_batch(
        requested,
        tag_table,
        backend=backend,
        params=params,
        template=template,
        template_path=args.template,
        out_dir=args.out_dir,
        max_concurrency=cfg.gateway.max_concurrency,
        retry=retry,
    )
    for report in result.reports:
        print(f"wrote {Path(args.out_dir) / report_filename(report.student_id)}")
    if result.failures:
        raise _fail(
            f"{len(result.failures)} of {len(requested)} reports failed",
            EXIT_RUNTIME,
            failures=[{"student_id": sid, "reason": reason} for sid, reason in result.failures],
        )
    return EXIT_OK


def cmd_eval_stats(args) -> int:
    cfg = _load_cfg(args)
    _require_file(args.input, "survey file")
    try:
        responses = evalstats.load_survey(args.input)
    except ValueError as exc:
        raise _fail(str(exc), EXIT_CONFIG)
    threshold = args.low_threshold if args.low_threshold is not None else cfg.survey_low_total_threshold
    filtered = evalstats.filter_responses(responses, low_total_threshold=threshold)
    valid, low, perfect = filtered.counts()
    print(f"valid={valid} low={low} perfect={perfect}")
    for r in filtered.discarded_low:
        print(f"  discarded low total={r.total}: {r.respondent_id}", file=sys.stderr)
    if not filtered.valid:
        raise _fail("no valid responses to summarize", EXIT_RUNTIME)
    summaries = evalstats.summarize(filtered.valid)
    if args.out:
        evalstats.write_summary_csv(summaries, args.out)
        print(f"wrote {args.out}")
    else:
        for dim in evalstats.DIMENSIONS:
            s = summaries[dim]
            print(
                f"{dim}: n={s.n} mean={s.mean:.2f} median={s.median} "
                f"q1={s.q1} q3={s.q3} outliers={list(s.outliers)}"
            )
    if args.plot:
        evalstats.render_boxplot(summaries, args.plot)
        print(f"wrote {args.plot}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.profile:
        _require_file(args.profile, "profile spec")
        try:
            spec = synth.load_cohort_spec(args.profile)
        except ValueError as exc:
            raise _fail(str(exc), EXIT_CONFIG)
    else:
        spec = synth.CohortSpec()
    overrides = {}
    if args.students is not None:
        overrides["n_students"] = args.students
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.attempts_per_dimension is not None:
        overrides["attempts_per_dimension"] = args.attempts_per_dimension
    if overrides:
        from dataclasses import replace

        spec = replace(spec, **overrides)
    records = synth.generate_from_spec(spec)
    write_attempts_csv(records, args.out)
    print(f"students={spec.n_students} attempts={len(records)} seed={spec.seed}")
    print(f"wrote {args.out}")
    if args.write_mappings:
        out = Path(args.write_mappings)
        out.mkdir(parents=True, exist_ok=True)
        for src in (DEFAULT_KNOWLEDGE_MAP, DEFAULT_ABILITY_MAP):
            shutil.copy(src, out / src.name)
            print(f"wrote {out / src.name}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tagfeedback",
        description="Tag student attempt logs and generate personalized feedback reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-check", help="validate an attempts file and report row quality")
    p.add_argument("--input", required=True, help="attempts CSV or JSON-lines file")
    p.add_argument("--max-reasons", type=int, default=20, help="cap on rejection reasons printed")
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("tag", help="run the cleaning + tagging pipeline, write the student tag file")
    p.add_argument("--input", required=True, help="raw attempts CSV or JSON-lines file")
    p.add_argument("--mapping-k", help="knowledge raw->area mapping file (default: bundled)")
    p.add_argument("--mapping-a", help="ability raw->domain mapping file (default: bundled)")
    p.add_argument("--out", required=True, help="output student tag file")
    p.add_argument("--config", help="flat key-value config file")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("report", help="generate feedback reports from a tag dataset")
    p.add_argument("--tags", help="student tag file (as written by 'tag')")
    p.add_argument("--input", help="raw attempts file, triggers the tag pipeline first")
    p.add_argument("--mapping-k", help="knowledge mapping when using --input")
    p.add_argument("--mapping-a", help="ability mapping when using --input")
    p.add_argument("--students", action="append", default=[],
                   help="comma-separated student ids; repeatable")
    p.add_argument("--all", action="store_true", help="report on every student in the dataset")
    p.add_argument("--backend", choices=("mock", "http"), default="mock",
                   help="mock needs no credentials (default)")
    p.add_argument("--endpoint", help="chat-completion endpoint URL for --backend http")
    p.add_argument("--model", help="model name override")
    p.add_argument("--template", help="prompt template file overriding the bundled default")
    p.add_argument("--out-dir", default="reports", help="directory for report files")
    p.add_argument("--config", help="flat key-value config file")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("eval-stats", help="survey filtering and per-dimension boxplot statistics")
    p.add_argument("--input", required=True, help="survey CSV (respondent_id,u,p,m,c,o,advice)")
    p.add_argument("--low-threshold", type=int, help="max total treated as unjustifiably low")
    p.add_argument("--out", help="write the summary table CSV here instead of stdout")
    p.add_argument("--plot", help="write a boxplot image to this path")
    p.add_argument("--config", help="flat key-value config file")
    p.set_defaults(func=cmd_eval_stats)

    p = sub.add_parser("synth", help="generate a synthetic cohort CSV with known ground truth")
    p.add_argument("--out", required=True, help="output attempts CSV")
    p.add_argument("--profile", help="cohort spec file (flat key-value)")
    p.add_argument("--students", type=int, help="number of students")
    p.add_argument("--seed", type=int, help="deterministic seed")
    p.add_argument("--attempts-per-dimension", type=int, help="attempts per knowledge/ability dimension")
    p.add_argument("--write-mappings", metavar="DIR",
                   help="also copy the bundled mapping files into DIR")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        _emit_error(err)
        return err.code
    except GatewayError as exc:
        _emit_error(CliError(f"{type(exc).__name__}: {exc}", EXIT_RUNTIME))
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
