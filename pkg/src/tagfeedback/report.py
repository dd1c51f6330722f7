"""Batch report generation: tags -> prompt -> completion -> files on disk.

Each student yields a markdown report plus a machine-readable sidecar with
the tag vector, the exact prompt, the parameters sent, and timing metadata.
Report bodies are deterministic under the mock backend; anything that can
vary between runs (timestamps) lives only in the sidecar.
"""

from __future__ import annotations

import hashlib
import json
import urllib.parse
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .gateway import CompletionParams, CompletionResult, MockBackend, RetryPolicy, complete_many
from .model import TagSet
from .promptgen import (
    DEFAULT_TEMPLATE_PATH,
    InvalidTagSetError,
    PromptTemplate,
    load_tag_table,
    load_template,
    render_prompt,
)


@dataclass
class StudentReport:
    student_id: str
    tags: TagSet
    prompt: str
    completion: CompletionResult
    backend: str
    params: CompletionParams
    template_sha256: str
    generated_at: datetime


@dataclass
class BatchResult:
    reports: list[StudentReport] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)

    def ok(self) -> bool:
        return not self.failures


def report_filename(student_id: str) -> str:
    # opaque ids may contain separators; percent-encode for a safe flat name
    return f"report_{urllib.parse.quote(student_id, safe='')}.md"


def _template_digest(template_text: str) -> str:
    return hashlib.sha256(template_text.encode("utf-8")).hexdigest()


def write_report(report: StudentReport, out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    md_path = out_dir / report_filename(report.student_id)
    meta_path = md_path.with_suffix(".meta.json")

    body = f"# Feedback report for student {report.student_id}\n\n{report.completion.text}"
    if not body.endswith("\n"):
        body += "\n"
    md_path.write_text(body, encoding="utf-8")

    meta = {
        "student_id": report.student_id,
        "flags": list(report.tags.flags),
        "tags": [t.value for t in report.tags.set_tags()],
        "prompt": report.prompt,
        "prompt_sha256": hashlib.sha256(report.prompt.encode("utf-8")).hexdigest(),
        "template_sha256": report.template_sha256,
        "backend": report.backend,
        "params": {
            "model": report.params.model,
            "temperature": report.params.temperature,
            "max_tokens": report.params.max_tokens,
            "top_p": report.params.top_p,
            "frequency_penalty": report.params.frequency_penalty,
            "presence_penalty": report.params.presence_penalty,
        },
        "finish_reason": report.completion.finish_reason,
        "truncated": report.completion.truncated,
        "usage": {
            "prompt_tokens": report.completion.prompt_tokens,
            "completion_tokens": report.completion.completion_tokens,
        },
        "retries": report.completion.retries,
        "generated_at": report.generated_at.isoformat(),
    }
    meta_path.write_text(json.dumps(meta, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    return md_path, meta_path


def generate_batch(student_ids, tag_table, *, backend=None, params: CompletionParams | None = None,
                   template: PromptTemplate | None = None, template_path=None,
                   out_dir=None, max_concurrency: int = 4, retry: RetryPolicy | None = None,
                   now=None) -> BatchResult:
    """Generate one report per requested student; partial failures never abort.

    tag_table may be a mapping of student id -> TagSet or a path to the tag
    dataset file. Reports are produced and written in sorted student order.
    """
    if isinstance(tag_table, (str, Path)):
        tag_table = load_tag_table(tag_table)
    backend = backend or MockBackend()
    params = params or CompletionParams()
    if template is None:
        template_text = Path(template_path or DEFAULT_TEMPLATE_PATH).read_text(encoding="utf-8")
        template = load_template(template_path)
    else:
        template_text = repr(template)
    template_sha = _template_digest(template_text)
    now = now or (lambda: datetime.now(timezone.utc))

    result = BatchResult()
    prompts: dict[str, str] = {}
    for sid in sorted(set(str(s) for s in student_ids)):
        tags = tag_table.get(sid)
        if tags is None:
            result.failures.append((sid, "unknown student"))
            continue
        try:
            prompts[sid] = render_prompt(tags, template)
        except InvalidTagSetError as exc:
            result.failures.append((sid, f"invalid tag vector: {exc}"))

    completions, errors = complete_many(
        sorted(prompts.items()), params=params, backend=backend,
        max_concurrency=max_concurrency, retry=retry,
    )
    for sid, exc in sorted(errors.items()):
        result.failures.append((sid, f"{type(exc).__name__}: {exc}"))

    for sid in sorted(completions):
        report = StudentReport(
            student_id=sid,
            tags=tag_table[sid],
            prompt=prompts[sid],
            completion=completions[sid],
            backend=getattr(backend, "name", type(backend).__name__),
            params=params,
            template_sha256=template_sha,
            generated_at=now(),
        )
        result.reports.append(report)
        if out_dir is not None:
            write_report(report, out_dir)

    result.failures.sort(key=lambda pair: pair[0])
    return result
