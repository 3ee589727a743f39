"""Time ``sasvkit eval`` on a synthetic score file.

    python3 scripts/bench_eval.py --trials 1000000 --repeat 3
"""

import argparse
import json
import shutil
import subprocess
import sys
import tempfile
import time
from pathlib import Path


def cli():
    exe = shutil.which("sasvkit")
    return [exe] if exe else [sys.executable, "-m", "sasvkit"]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        n_spoof = args.trials // 5
        n_bona = args.trials - n_spoof
        config = {"n_target": n_bona // 2, "n_nontarget": n_bona - n_bona // 2, "n_spoof": n_spoof, "mu_spoof": 1.0}
        (tmp / "config.json").write_text(json.dumps(config))
        subprocess.run(cli() + ["gen", "--config", str(tmp / "config.json"), "--seed", str(args.seed),
                                "--out-dir", str(tmp / "data")], check=True)
        cmd = cli() + ["eval", "--scores", str(tmp / "data" / "scores.txt"),
                       "--trials", str(tmp / "data" / "trials.txt"), "--out", str(tmp / "report.json")]
        times = []
        for _ in range(args.repeat):
            start = time.perf_counter()
            subprocess.run(cmd, check=True)
            times.append(time.perf_counter() - start)
        print(f"{args.trials} trials: best {min(times):.2f} s, runs {', '.join(f'{t:.2f}' for t in times)}")


if __name__ == "__main__":
    main()
