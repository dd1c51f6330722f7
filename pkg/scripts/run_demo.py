#!/usr/bin/env python3
"""End-to-end demo: synthesize a cohort, tag it, and write mock reports.

Everything runs offline against the deterministic mock backend, so the
output directory is byte-stable for a given seed. Run from anywhere:

    python3 scripts/run_demo.py --out-dir demo_out --students 12 --seed 7
"""

import argparse
import sys
from pathlib import Path

from tagfeedback.cli import main as cli


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="demo_out", help="directory for all demo artifacts")
    ap.add_argument("--students", type=int, default=12)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--attempts-per-dimension", type=int, default=12)
    args = ap.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    attempts_csv = out / "attempts.csv"
    tags_csv = out / "student_tag.csv"
    reports_dir = out / "reports"

    steps = [
        ("synthesize attempts", ["synth", "--out", str(attempts_csv),
                                 "--students", str(args.students),
                                 "--seed", str(args.seed),
                                 "--attempts-per-dimension", str(args.attempts_per_dimension)]),
        ("validate raw file", ["ingest-check", "--input", str(attempts_csv)]),
        ("compute tag vectors", ["tag", "--input", str(attempts_csv),
                                 "--out", str(tags_csv)]),
        ("write mock reports", ["report", "--tags", str(tags_csv), "--all",
                                "--backend", "mock", "--out-dir", str(reports_dir)]),
    ]
    for label, argv_step in steps:
        print(f"--- {label}: tagfeedback {' '.join(argv_step)}")
        code = cli(argv_step)
        if code != 0:
            print(f"demo step failed with exit code {code}", file=sys.stderr)
            return code

    n_reports = len(list(reports_dir.glob("*.md")))
    print(f"--- done: {n_reports} reports under {reports_dir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
