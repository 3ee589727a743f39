"""Deterministic JSON reports and the macro a-DCF diagnostic."""

from __future__ import annotations

import json
import math

from .ingest import atomic_write_text
from .metrics import MetricReport, compute_macro_adcf

# Per-dataset a-DCF of the reference challenge submission (team T03) and the
# macro value published alongside it. The published macro is not the mean of
# the four columns; both are printed by the diagnostic, neither is trusted.
REFERENCE_PER_DATASET = (
    ("WildSpoof-TTS", 0.1924),
    ("SpoofCeleb", 0.0457),
    ("ASVspoofF5", 0.4088),
    ("ASV 2022", 0.3252),
)
REFERENCE_MACRO_ADCF = 0.2017


def to_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def report_emit(report: MetricReport | dict, path) -> None:
    doc = report.to_dict() if isinstance(report, MetricReport) else report
    atomic_write_text(path, to_json(doc))


def macro_note(per_dataset=REFERENCE_PER_DATASET, reported: float = REFERENCE_MACRO_ADCF) -> list[str]:
    mean = compute_macro_adcf(per_dataset)
    listed = " ".join(f"{name}={value!r}" for name, value in per_dataset)
    return [
        f"macro-note: reference per-dataset a-DCF: {listed}",
        f"macro-note: unweighted mean of the listed values = {mean:.6g}",
        f"macro-note: reported macro a-DCF = {reported!r} "
        f"(difference {math.fabs(mean - reported):.6g}; averaging scheme unknown, neither value asserted)",
    ]
