"""Regenerate the golden synthetic fixtures under tests/fixtures/syn/expected.

    python3 scripts/regen_fixtures.py [OUT_DIR]

The acceptance suite reruns the same steps into a temporary directory and
compares the files byte for byte.
"""

import sys
from pathlib import Path

from sasvkit.cli import main

ROOT = Path(__file__).resolve().parents[1]
CONFIG = ROOT / "tests" / "fixtures" / "syn" / "gen_config.json"
SEED = 20240917
FILES = (
    "config.json", "trials.txt", "scores.txt", "embeddings.txt", "enroll.txt", "emb_trials.txt",
    "asv.txt", "report.json", "asv_report.json",
)


def regenerate(out: Path) -> None:
    steps = [
        ["gen", "--config", CONFIG, "--seed", SEED, "--out-dir", out],
        ["eval", "--scores", out / "scores.txt", "--trials", out / "trials.txt", "--out", out / "report.json"],
        ["score", "--embeddings", out / "embeddings.txt", "--enroll", out / "enroll.txt",
         "--trials", out / "emb_trials.txt", "--out", out / "asv.txt"],
        ["eval", "--scores", out / "asv.txt", "--trials", out / "emb_trials.txt", "--out", out / "asv_report.json"],
    ]
    for argv in steps:
        if main([str(a) for a in argv]) != 0:
            raise SystemExit(f"step failed: {argv[0]}")


if __name__ == "__main__":
    regenerate(Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "tests" / "fixtures" / "syn" / "expected")
