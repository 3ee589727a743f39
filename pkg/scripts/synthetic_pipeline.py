"""End-to-end demo on synthetic data: gen -> score -> fuse -> cascade -> eval.

    python3 scripts/synthetic_pipeline.py --work-dir /tmp/sasv_demo --seed 7

Two ASV "systems" are built from the same embeddings (the cosine backend and
a noisy copy of it), fused, then gated by a CM whose scores are Gaussian
with a 3-sigma gap between bona fide and spoof trials.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from sasvkit.cli import main
from sasvkit.ingest import parse_score_file, parse_trial_list, write_score_file


def run(*argv):
    if main([str(a) for a in argv]) != 0:
        raise SystemExit(f"sasvkit {argv[0]} failed")


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--work-dir", type=Path, required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--speakers", type=int, default=20)
    p.add_argument("--trials", type=int, default=2000, help="trials per bona fide class")
    return p.parse_args()


def main_demo(args):
    w = args.work_dir
    w.mkdir(parents=True, exist_ok=True)
    config = {
        "n_target": args.trials, "n_nontarget": args.trials, "n_spoof": args.trials // 2,
        "mu_tar": 3.0, "mu_non": 0.0, "mu_spoof": 0.5,
        "dim": 16, "n_speakers": args.speakers, "enroll_per_speaker": 3, "within_std": 0.6,
    }
    (w / "config.json").write_text(json.dumps(config))
    run("gen", "--config", w / "config.json", "--seed", args.seed, "--out-dir", w / "gen")

    trials = w / "gen" / "emb_trials.txt"
    run("score", "--embeddings", w / "gen" / "embeddings.txt", "--enroll", w / "gen" / "enroll.txt",
        "--trials", trials, "--out", w / "asv1.txt", "--name", "cosine")

    # second system: same scores plus independent noise
    rng = np.random.default_rng(args.seed)
    asv1 = parse_score_file(w / "asv1.txt")
    write_score_file(asv1.with_values(asv1.values + rng.normal(0, 0.1, len(asv1)), "noisy"), w / "asv2.txt")
    run("fuse", "--scores", w / "asv1.txt", w / "asv2.txt", "--weights", "0.7,0.3", "--out", w / "fused.txt")

    # CM scores: N(3, 1) for bona fide, N(0, 1) for spoof
    labels = np.array([t.label for t in parse_trial_list(trials)])
    cm_values = np.where(labels == 2, rng.normal(0.0, 1.0, labels.size), rng.normal(3.0, 1.0, labels.size))
    write_score_file(asv1.with_values(cm_values, "cm"), w / "cm.txt")

    run("cascade", "--cm", w / "cm.txt", "--asv", w / "fused.txt", "--dev-cm", w / "cm.txt",
        "--dev-trials", trials, "--out", w / "sasv.txt", "--decisions", w / "decisions.txt")
    run("eval", "--scores", w / "sasv.txt", "--trials", trials, "--cm", w / "cm.txt", "--asv", w / "fused.txt",
        "--out", w / "report.json")
    run("det", "--scores", w / "sasv.txt", "--trials", trials, "--out", w / "det.tsv")
    print((w / "report.json").read_text(), end="")


if __name__ == "__main__":
    main_demo(parse_args())
