#!/usr/bin/env python3
"""Write a demo survey CSV: 63 responses that filter to valid=32 low=3 perfect=28.

The file exercises every branch of the questionnaire filter: 28 all-perfect
questionnaires (discarded as non-genuine), 3 with totals at or below the low
threshold of 5 (discarded as unjustifiably low), and 32 genuine mixed
responses. Pipe it through the CLI afterwards:

    python3 scripts/make_demo_survey.py --out demo_survey.csv
    python3 -m tagfeedback eval-stats --input demo_survey.csv --plot demo_box.png
"""

import argparse
import csv
import random
from pathlib import Path


def build_rows(seed: int = 6363):
    rng = random.Random(seed)
    rows = []
    for i in range(28):
        rows.append([f"perfect{i:02d}", 10, 10, 10, 10, 10, "great"])
    for i, total in enumerate([2, 4, 5]):
        scores = [0, 0, 0, 0, 0]
        for _ in range(total):
            scores[rng.randint(0, 4)] += 1
        rows.append([f"low{i}", *scores, ""])
    for i in range(32):
        first_four = [rng.randint(0, 10) for _ in range(4)]
        t4 = sum(first_four)
        last = rng.randint(max(0, 6 - t4), min(10, 49 - t4))
        rows.append([f"mixed{i:02d}", *first_four, last,
                     rng.choice(["clear", "more examples please", "helpful", ""])])
    rng.shuffle(rows)
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="demo_survey.csv", help="output CSV path")
    ap.add_argument("--seed", type=int, default=6363)
    args = ap.parse_args(argv)

    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["respondent_id", "u", "p", "m", "c", "o", "advice"])
        writer.writerows(build_rows(args.seed))
    print(f"wrote {path} (63 responses: 32 valid, 3 low, 28 perfect)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
