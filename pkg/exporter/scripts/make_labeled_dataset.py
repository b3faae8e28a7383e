"""Generate the 40-row labeled fixture for the toy fine-tune path.

Each criterion gets one signal word; a row's label j is 1 exactly when
signal word j appears in the text. That makes the set linearly separable
by construction, which the script verifies before writing: no hash-bucket
collisions among signal and filler words, and a trial fine-tune must reach
perfect train accuracy.

Usage: python3 make_labeled_dataset.py [output.jsonl]
"""

from __future__ import annotations

import json
import random
import sys

from qualityexport.dataset import CRITERIA, LabeledExample
from qualityexport.model import FEATURE_DIM, finetune
from qualityexport.text import stable_hash

SEED = 4021

# one marker per criterion: costs, quantified benefits, alternatives, availability
SIGNAL_WORDS = ("pricing", "magnitude", "alternative", "availability")

FILLER_WORDS = (
    "the", "study", "reports", "patients", "clinic", "trial", "results",
    "overall", "sample", "followup", "reviewed", "summary", "coverage",
    "evidence", "treatment", "outcomes",
)


def build_rows(rng: random.Random) -> list[dict]:
    buckets = {word: stable_hash(word) % FEATURE_DIM
               for word in SIGNAL_WORDS + FILLER_WORDS}
    if len(set(buckets.values())) != len(buckets):
        raise SystemExit("hash-bucket collision in the vocabulary, pick other words")
    rows = []
    for i in range(40):
        combo = i % 16
        labels = [(combo >> j) & 1 for j in range(len(CRITERIA))]
        words = rng.sample(FILLER_WORDS, rng.randint(5, 8))
        words += [word for word, bit in zip(SIGNAL_WORDS, labels) if bit]
        rng.shuffle(words)
        text = " ".join(words) + "."
        rows.append({"text": text, "labels": labels})
    return rows


def main() -> None:
    output = sys.argv[1] if len(sys.argv) > 1 else "labeled_40.jsonl"
    rng = random.Random(SEED)
    rows = build_rows(rng)
    examples = [LabeledExample(row["text"], tuple(row["labels"])) for row in rows]
    _, accuracy = finetune(examples, "fixture-check")
    if any(value < 1.0 for value in accuracy.values()):
        raise SystemExit(f"fixture is not separable under training: {accuracy}")
    with open(output, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    print(f"wrote {len(rows)} rows: {output} (train accuracy {accuracy})")


if __name__ == "__main__":
    main()
