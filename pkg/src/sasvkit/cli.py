"""Command-line entry point: ``sasvkit <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error (one ``E_*`` line on
stderr), 2 on usage errors. Every output file is written atomically.
"""

from __future__ import annotations

import argparse
import gc
import json
import sys
from pathlib import Path

from . import __version__
from .backend import score_trials
from .cascade import CascadeConfig, cascade_decide, cascade_score, format_decisions
from .errors import InvalidConfig, IoFailure, SasvError
from .fusion import FusionConfig, fuse
from .ingest import (
    atomic_write_text,
    load_labeled_scores,
    parse_embeddings,
    parse_enrollment_map,
    parse_manifest,
    parse_score_file,
    parse_trial_list,
    write_embeddings,
    write_enrollment_map,
    write_score_file,
    write_trial_list,
)
from .metrics import AdcfParams, build_report, compute_adcf, compute_macro_adcf, det_table, error_profile
from .report import macro_note, report_emit, to_json
from .syngen import SynConfig, generate_embeddings, generate_scores, scores_to_files


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _threshold(text: str):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed {value} out of u64 range")
    return value


def _add_adcf_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--adcf-costs", type=_floats, metavar="MISS,FA_NON,FA_SPOOF")
    p.add_argument("--adcf-priors", type=_floats, metavar="TAR,NON,SPOOF")
    p.add_argument("--no-normalize", action="store_true", help="report the raw (unnormalized) a-DCF")


def _adcf_params(args) -> AdcfParams:
    return AdcfParams.from_lists(args.adcf_costs, args.adcf_priors, normalize=not args.no_normalize)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sasvkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("score", help="cosine-score trials from embeddings")
    p.add_argument("--embeddings", type=Path, required=True)
    p.add_argument("--enroll", type=Path, required=True, help="enrollment map file")
    p.add_argument("--trials", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--name", default="asv")

    p = sub.add_parser("fuse", help="z-normalize and fuse score files")
    p.add_argument("--scores", type=Path, nargs="+", required=True)
    p.add_argument("--weights", type=_floats, help="one weight per score file (default uniform)")
    p.add_argument("--cohort", default="self",
                   help="'self' or comma-separated cohort score files, one per system")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("cascade", help="gate fused ASV scores with a CM")
    p.add_argument("--cm", type=Path, required=True)
    p.add_argument("--asv", type=Path, required=True)
    p.add_argument("--cm-threshold", type=_threshold, default="auto")
    p.add_argument("--dev-cm", type=Path, help="dev CM scores (for --cm-threshold auto)")
    p.add_argument("--dev-trials", type=Path, help="trial labels for --dev-cm")
    p.add_argument("--asv-threshold", type=float, default=0.0)
    p.add_argument("--out", type=Path, required=True, help="gated score file")
    p.add_argument("--decisions", type=Path, help="decision dump")

    p = sub.add_parser("eval", help="EER / SASV-EER / a-DCF report")
    p.add_argument("--scores", type=Path, required=True, help="SASV score stream")
    p.add_argument("--trials", type=Path, required=True)
    p.add_argument("--cm", type=Path, help="CM scores for SD EER")
    p.add_argument("--asv", type=Path, help="ASV scores for ASV EER")
    p.add_argument("--lenient", action="store_true", help="drop scores without a trial")
    p.add_argument("--out", type=Path, help="JSON report path (default stdout)")
    _add_adcf_args(p)

    p = sub.add_parser("macro", help="macro a-DCF over datasets")
    p.add_argument("--manifest", type=Path)
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--macro-note", action="store_true",
                   help="print the reference macro a-DCF discrepancy diagnostic")
    p.add_argument("--out", type=Path)
    _add_adcf_args(p)

    p = sub.add_parser("gen", help="write seeded synthetic fixtures")
    p.add_argument("--config", type=Path, required=True, help="JSON SynConfig")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("det", help="export DET points as TSV")
    p.add_argument("--scores", type=Path, required=True)
    p.add_argument("--trials", type=Path, required=True)
    p.add_argument("--negatives", choices=("pooled", "nontarget", "spoof"), default="pooled")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out", type=Path, required=True)
    return parser


INPUTS = {
    "score": ("embeddings", "enroll", "trials"),
    "fuse": ("scores",),
    "cascade": ("cm", "asv", "dev_cm", "dev_trials"),
    "eval": ("scores", "trials", "cm", "asv"),
    "macro": ("manifest",),
    "gen": ("config",),
    "det": ("scores", "trials"),
}


def _check_inputs(args) -> None:
    paths = []
    for name in INPUTS[args.command]:
        value = getattr(args, name)
        if value is not None:
            paths.extend(value if isinstance(value, list) else [value])
    if args.command == "fuse" and args.cohort != "self":
        paths.extend(Path(p) for p in args.cohort.split(","))
    for path in paths:
        if not path.is_file():
            raise IoFailure(f"input file not found: {path}")


def _labeled(scores_path, trials_path, lenient=False):
    return load_labeled_scores(trials_path, scores_path, strict=not lenient)


def cmd_score(args):
    table = parse_embeddings(args.embeddings)
    enrollmap = parse_enrollment_map(args.enroll)
    trials = parse_trial_list(args.trials)
    write_score_file(score_trials(table, enrollmap, trials, args.name), args.out)


def cmd_fuse(args):
    systems = [parse_score_file(p, p.stem) for p in args.scores]
    cohort = "self" if args.cohort == "self" else [parse_score_file(p) for p in args.cohort.split(",")]
    weights = args.weights if args.weights is not None else [1.0] * len(systems)
    write_score_file(fuse(systems, FusionConfig(tuple(weights), cohort)), args.out)


def cmd_cascade(args):
    cm = parse_score_file(args.cm, "cm")
    asv = parse_score_file(args.asv, "asv")
    config = CascadeConfig(args.cm_threshold, args.asv_threshold)
    if config.cm_threshold == "auto":
        if args.dev_cm is None or args.dev_trials is None:
            raise InvalidConfig("--cm-threshold auto needs --dev-cm and --dev-trials")
        config = config.resolve(_labeled(args.dev_cm, args.dev_trials))
    write_score_file(cascade_score(cm, asv, config.cm_threshold), args.out)
    if args.decisions is not None:
        atomic_write_text(args.decisions, format_decisions(cascade_decide(cm, asv, config)))


def cmd_eval(args):
    sasv = _labeled(args.scores, args.trials, args.lenient)
    cm = _labeled(args.cm, args.trials, args.lenient) if args.cm else None
    asv = _labeled(args.asv, args.trials, args.lenient) if args.asv else None
    report = build_report(sasv, _adcf_params(args), cm=cm, asv=asv)
    if args.out is None:
        sys.stdout.write(to_json(report.to_dict()))
    else:
        report_emit(report, args.out)


def cmd_macro(args):
    if args.macro_note:
        for line in macro_note():
            print(line)
    if args.manifest is None:
        if not args.macro_note:
            raise InvalidConfig("macro needs --manifest (or --macro-note)")
        return
    params = _adcf_params(args)
    datasets = []
    for entry in parse_manifest(args.manifest):
        labeled = _labeled(entry.scores, entry.trials, args.lenient)
        adcf, threshold = compute_adcf(error_profile(labeled), params)
        datasets.append({"name": entry.name, "adcf": adcf, "threshold": threshold})
    doc = {
        "datasets": datasets,
        "macro_adcf": compute_macro_adcf([(d["name"], d["adcf"]) for d in datasets]),
    }
    if args.out is None:
        sys.stdout.write(to_json(doc))
    else:
        report_emit(doc, args.out)


def cmd_gen(args):
    try:
        doc = json.loads(args.config.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{args.config}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidConfig(f"{args.config}: expected a JSON object")
    if args.seed is not None:
        doc["seed"] = args.seed
    config = SynConfig.from_dict(doc)
    out = args.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc
    trials, scores = scores_to_files(generate_scores(config))
    write_trial_list(trials, out / "trials.txt")
    write_score_file(scores, out / "scores.txt")
    if config.embedding_mode:
        table, enrollmap, emb_trials = generate_embeddings(config)
        write_embeddings(table, out / "embeddings.txt")
        write_enrollment_map(enrollmap, out / "enroll.txt")
        write_trial_list(emb_trials, out / "emb_trials.txt")
    atomic_write_text(out / "config.json", to_json(config.to_dict()))


def cmd_det(args):
    labeled = _labeled(args.scores, args.trials, args.lenient)
    atomic_write_text(args.out, det_table(error_profile(labeled), args.negatives))


COMMANDS = {
    "score": cmd_score,
    "fuse": cmd_fuse,
    "cascade": cmd_cascade,
    "eval": cmd_eval,
    "macro": cmd_macro,
    "gen": cmd_gen,
    "det": cmd_det,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # one-shot process over acyclic data: cyclic GC only costs time here
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        _check_inputs(args)
        COMMANDS[args.command](args)
    except SasvError as exc:
        msg = " ".join(str(exc).split())
        print(f"sasvkit: {exc.code}: {msg}", file=sys.stderr)
        return 1
    finally:
        if gc_was_enabled:
            gc.enable()
    return 0


if __name__ == "__main__":
    sys.exit(main())
