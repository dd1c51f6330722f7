"""Questionnaire analysis: response filtering and boxplot statistics.

Responses score five dimensions from 0 to 10. All-perfect questionnaires
(total 50) are discarded as non-genuine, totals at or below a configurable
threshold as unjustifiably low, and the rest are analyzed per dimension with
Tukey-hinge quartiles and the 1.5*IQR whisker rule so boxplot output is
fully deterministic.
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

DIMENSIONS = (
    "Understanding Level",
    "Practicality",
    "Motivation effect",
    "Clarity",
    "Organizational structure",
)

_SCORE_COLUMNS = ("u", "p", "m", "c", "o")

MAX_SCORE = 10
PERFECT_TOTAL = MAX_SCORE * len(DIMENSIONS)


class EmptyInputError(ValueError):
    pass


@dataclass(frozen=True)
class SurveyResponse:
    respondent_id: str
    scores: tuple[int, ...]  # five values, DIMENSIONS order
    advice: str = ""

    def __post_init__(self):
        if len(self.scores) != len(DIMENSIONS):
            raise ValueError(f"expected {len(DIMENSIONS)} scores, got {len(self.scores)}")
        for s in self.scores:
            if not isinstance(s, int) or not (0 <= s <= MAX_SCORE):
                raise ValueError(f"scores must be integers in [0, {MAX_SCORE}], got {s!r}")

    @property
    def total(self) -> int:
        return sum(self.scores)


@dataclass
class FilterResult:
    valid: list = field(default_factory=list)
    discarded_low: list = field(default_factory=list)
    discarded_perfect: list = field(default_factory=list)

    def counts(self) -> tuple[int, int, int]:
        return len(self.valid), len(self.discarded_low), len(self.discarded_perfect)


def filter_responses(responses, low_total_threshold: int = 5) -> FilterResult:
    """Partition responses into valid / unjustifiably-low / non-genuine-perfect."""
    result = FilterResult()
    for r in responses:
        if r.total == PERFECT_TOTAL:
            result.discarded_perfect.append(r)
        elif r.total <= low_total_threshold:
            result.discarded_low.append(r)
        else:
            result.valid.append(r)
    return result


@dataclass(frozen=True)
class DimensionSummary:
    dimension: str
    n: int
    mean: float
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def tukey_hinges(values) -> tuple[float, float]:
    """Lower and upper hinge via the classic depth formula.

    Hinge depth = (floor(median depth) + 1) / 2 with median depth (n+1)/2;
    a half-integer depth averages the two neighboring order statistics.
    """
    s = sorted(values)
    n = len(s)
    depth = (math.floor((n + 1) / 2) + 1) / 2

    def at(d: float, reverse: bool) -> float:
        xs = s[::-1] if reverse else s
        lo = math.floor(d)
        if d == lo:
            return float(xs[lo - 1])
        return (xs[lo - 1] + xs[lo]) / 2

    return at(depth, reverse=False), at(depth, reverse=True)


def summarize_values(dimension: str, values) -> DimensionSummary:
    values = list(values)
    if not values:
        raise EmptyInputError(f"no values for dimension {dimension!r}")
    q1, q3 = tukey_hinges(values)
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = [v for v in values if lo_fence <= v <= hi_fence]
    outliers = tuple(sorted(v for v in values if v < lo_fence or v > hi_fence))
    return DimensionSummary(
        dimension=dimension,
        n=len(values),
        mean=statistics.fmean(values),
        median=float(statistics.median(values)),
        q1=q1,
        q3=q3,
        whisker_low=float(min(inside)),
        whisker_high=float(max(inside)),
        outliers=outliers,
    )


def summarize(valid_responses) -> dict[str, DimensionSummary]:
    """Per-dimension descriptive statistics over the valid responses."""
    valid_responses = list(valid_responses)
    if not valid_responses:
        raise EmptyInputError("no valid responses to summarize")
    return {
        dim: summarize_values(dim, [r.scores[i] for r in valid_responses])
        for i, dim in enumerate(DIMENSIONS)
    }


def load_survey(path) -> list[SurveyResponse]:
    """Read a survey CSV: respondent_id, u, p, m, c, o, optional advice."""
    responses = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError("survey file is empty")
        missing = [c for c in ("respondent_id", *_SCORE_COLUMNS) if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"survey file missing columns: {', '.join(missing)}")
        for row in reader:
            try:
                scores = tuple(int(str(row[c]).strip()) for c in _SCORE_COLUMNS)
            except (TypeError, ValueError):
                raise ValueError(f"line {reader.line_num}: scores must be integers 0..{MAX_SCORE}")
            responses.append(
                SurveyResponse(
                    respondent_id=str(row["respondent_id"]).strip(),
                    scores=scores,
                    advice=(row.get("advice") or "").strip(),
                )
            )
    return responses


def write_summary_csv(summaries, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["dimension", "n", "mean", "median", "q1", "q3", "whisker_low", "whisker_high", "outliers"]
        )
        for dim in DIMENSIONS:
            s = summaries[dim]
            writer.writerow(
                [s.dimension, s.n, f"{s.mean:.4f}", s.median, s.q1, s.q3,
                 s.whisker_low, s.whisker_high, ";".join(str(v) for v in s.outliers)]
            )


def render_boxplot(summaries, path) -> None:
    """Draw the five-dimension boxplot from our own statistics (not recomputed)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    stats = []
    for dim in DIMENSIONS:
        s = summaries[dim]
        stats.append(
            {
                "label": dim,
                "mean": s.mean,
                "med": s.median,
                "q1": s.q1,
                "q3": s.q3,
                "whislo": s.whisker_low,
                "whishi": s.whisker_high,
                "fliers": list(s.outliers),
            }
        )
    fig, ax = plt.subplots(figsize=(9, 5))
    ax.bxp(stats, showmeans=True)
    ax.set_ylabel("score (0-10)")
    ax.set_ylim(-0.5, 10.5)
    ax.tick_params(axis="x", labelrotation=15)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
