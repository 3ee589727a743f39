"""Trial lists, score files, embedding tables, enrollment maps and manifests.

All text formats are UTF-8, one record per line, fields separated by a single
ASCII space. Lines starting with ``#`` and empty lines are ignored. Floats are
written with ``repr`` (shortest round-trip decimal) so files are byte-stable.
"""

from __future__ import annotations

import contextlib
import enum
import gc
import json
import math
import os
import tempfile
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateDatasetName,
    DuplicateEnrollment,
    DuplicateTrial,
    DuplicateUtterance,
    IoFailure,
    MalformedLine,
    MalformedManifest,
    MissingScore,
    NonFiniteScore,
    UnknownLabel,
    UnmatchedScore,
    ZeroNormVector,
)

Key = tuple[str, str]


class TrialLabel(enum.IntEnum):
    TARGET = 0
    NONTARGET = 1
    SPOOF = 2

    @classmethod
    def parse(cls, token: str) -> TrialLabel:
        try:
            return _LABELS[token]
        except KeyError:
            raise UnknownLabel(f"unknown trial label {token!r}") from None

    @property
    def token(self) -> str:
        return self.name.lower()

    @property
    def is_bonafide(self) -> bool:
        return self is not TrialLabel.SPOOF


_LABELS = {label.token: label for label in TrialLabel}
_LABEL_CODES = {label.token: int(label) for label in TrialLabel}


class Trial(NamedTuple):
    enroll_id: str
    test_id: str
    label: TrialLabel

    @property
    def key(self) -> Key:
        return (self.enroll_id, self.test_id)


class TrialList(Sequence):
    """Trial list stored column-wise; items are built as ``Trial`` on access."""

    __slots__ = ("enroll_ids", "test_ids", "labels")

    def __init__(self, enroll_ids: Sequence[str], test_ids: Sequence[str], labels):
        self.enroll_ids = list(enroll_ids)
        self.test_ids = list(test_ids)
        self.labels = np.array(labels, dtype=np.int8)
        self.labels.setflags(write=False)
        if not len(self.enroll_ids) == len(self.test_ids) == self.labels.size:
            raise ValueError("trial columns differ in length")

    @classmethod
    def from_trials(cls, trials: Iterable[Trial]) -> TrialList:
        trials = list(trials)
        return cls([t[0] for t in trials], [t[1] for t in trials], [int(t[2]) for t in trials])

    def keys(self) -> Iterator[Key]:
        return zip(self.enroll_ids, self.test_ids)

    def __len__(self) -> int:
        return len(self.enroll_ids)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return TrialList(self.enroll_ids[i], self.test_ids[i], self.labels[i])
        return Trial(self.enroll_ids[i], self.test_ids[i], TrialLabel(int(self.labels[i])))

    def __iter__(self) -> Iterator[Trial]:
        return map(Trial, self.enroll_ids, self.test_ids, map(TrialLabel, self.labels.tolist()))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TrialList):
            return (self.enroll_ids == other.enroll_ids and self.test_ids == other.test_ids
                    and np.array_equal(self.labels, other.labels))
        if isinstance(other, Sequence):
            return list(self) == list(other)
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"TrialList(n={len(self)})"


class ScoreSet(Mapping):
    """Immutable mapping ``(enroll_id, test_id) -> score`` for one system.

    Insertion order is preserved; ``values`` exposes the scores as a read-only
    float64 array aligned with ``keys``.
    """

    __slots__ = ("_keys", "_values", "_index", "system_name")

    def __init__(self, keys: Iterable[Key], scores: Iterable[float], system_name: str = ""):
        keys = tuple((str(e), str(t)) for e, t in keys)
        values = np.array(list(scores) if not isinstance(scores, np.ndarray) else scores, dtype=np.float64)
        if values.shape != (len(keys),):
            raise ValueError("keys and scores differ in length")
        index = {}
        for i, key in enumerate(keys):
            if index.setdefault(key, i) != i:
                raise DuplicateTrial(f"duplicate score key {key[0]} {key[1]}")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            e, t = keys[bad[0]]
            raise NonFiniteScore(f"non-finite score for {e} {t}")
        self._init(keys, values, index, system_name)

    def _init(self, keys, values, index, system_name):
        values.setflags(write=False)
        self._keys = keys
        self._values = values
        self._index = index
        self.system_name = system_name

    @classmethod
    def _trusted(cls, keys, values, index, system_name) -> ScoreSet:
        obj = cls.__new__(cls)
        obj._init(keys, values, index, system_name)
        return obj

    @classmethod
    def from_mapping(cls, records: Mapping[Key, float], system_name: str = "") -> ScoreSet:
        return cls(records.keys(), [records[k] for k in records], system_name)

    @property
    def keys_tuple(self) -> tuple[Key, ...]:
        return self._keys

    @property
    def values(self) -> np.ndarray:  # type: ignore[override]
        return self._values

    def index_of(self, key: Key) -> int:
        return self._index[key]

    def key_set(self) -> frozenset[Key]:
        return frozenset(self._index)

    def with_values(self, values: np.ndarray, system_name: str | None = None) -> ScoreSet:
        """Same keys, new scores (validated for finiteness)."""
        values = np.array(values, dtype=np.float64)
        if values.shape != self._values.shape:
            raise ValueError("value array does not match key count")
        if not np.all(np.isfinite(values)):
            raise NonFiniteScore("non-finite score produced")
        name = self.system_name if system_name is None else system_name
        return ScoreSet._trusted(self._keys, values, self._index, name)

    def __getitem__(self, key: Key) -> float:
        return float(self._values[self._index[key]])

    def __iter__(self) -> Iterator[Key]:
        return iter(self._keys)

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key: object) -> bool:
        return key in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScoreSet):
            return NotImplemented
        return (
            self.system_name == other.system_name
            and self._keys == other._keys
            and np.array_equal(self._values, other._values)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"ScoreSet({self.system_name!r}, n={len(self)})"


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: Mapping[str, np.ndarray]

    def __post_init__(self):
        if self.dim <= 0:
            raise DimensionMismatch("embedding dimension must be positive")
        frozen = {}
        for utt, vec in self.vectors.items():
            arr = np.array(vec, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise DimensionMismatch(f"{utt}: expected dim {self.dim}, got {arr.size}")
            if not np.any(arr):
                raise ZeroNormVector(f"{utt}: zero-norm embedding")
            arr.setflags(write=False)
            frozen[utt] = arr
        object.__setattr__(self, "vectors", frozen)

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, utt: str) -> np.ndarray:
        return self.vectors[utt]

    def __contains__(self, utt: object) -> bool:
        return utt in self.vectors


@dataclass(frozen=True)
class EnrollmentMap:
    entries: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        frozen = {}
        for enroll_id, utts in self.entries.items():
            utts = tuple(utts)
            if not utts:
                raise MalformedLine(f"enrollment {enroll_id} has no utterances")
            frozen[enroll_id] = utts
        object.__setattr__(self, "entries", frozen)

    def __getitem__(self, enroll_id: str) -> tuple[str, ...]:
        return self.entries[enroll_id]

    def __contains__(self, enroll_id: object) -> bool:
        return enroll_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)


class DatasetEntry(NamedTuple):
    name: str
    trials: Path
    scores: Path


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[DatasetEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[DatasetEntry]:
        return iter(self.entries)


@dataclass(frozen=True)
class LabeledScores:
    """Scores aligned with trial labels, stored as parallel arrays.

    ``unmatched`` counts score records dropped by a lenient join.
    """

    scores: np.ndarray
    labels: np.ndarray
    unmatched: int = field(default=0, compare=False)

    def __post_init__(self):
        scores = np.array(self.scores, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int8)
        if scores.shape != labels.shape or scores.ndim != 1:
            raise ValueError("scores and labels must be 1-d arrays of equal length")
        scores.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, TrialLabel]]) -> LabeledScores:
        pairs = list(pairs)
        return cls([s for s, _ in pairs], [int(lab) for _, lab in pairs])

    @classmethod
    def from_classes(cls, target=(), nontarget=(), spoof=()) -> LabeledScores:
        parts = [np.asarray(target, float), np.asarray(nontarget, float), np.asarray(spoof, float)]
        labels = np.concatenate([np.full(p.size, lab, np.int8) for p, lab in zip(parts, TrialLabel)])
        return cls(np.concatenate(parts), labels)

    def __len__(self) -> int:
        return self.scores.size

    def pairs(self) -> list[tuple[float, TrialLabel]]:
        return [(float(s), TrialLabel(int(lab))) for s, lab in zip(self.scores, self.labels)]

    def of(self, *labels: TrialLabel) -> np.ndarray:
        mask = np.isin(self.labels, [int(lab) for lab in labels])
        return self.scores[mask]

    @property
    def target(self) -> np.ndarray:
        return self.of(TrialLabel.TARGET)

    @property
    def nontarget(self) -> np.ndarray:
        return self.of(TrialLabel.NONTARGET)

    @property
    def spoof(self) -> np.ndarray:
        return self.of(TrialLabel.SPOOF)

    @property
    def bonafide(self) -> np.ndarray:
        return self.of(TrialLabel.TARGET, TrialLabel.NONTARGET)

    def counts(self) -> dict[str, int]:
        n = np.bincount(self.labels, minlength=3)
        return {label.token: int(n[label]) for label in TrialLabel}


# ---------------------------------------------------------------------------
# reading


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as f:
            return f.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


@contextlib.contextmanager
def _gc_paused():
    # bulk parsing allocates millions of small tuples; cyclic GC passes over
    # them dominate the runtime otherwise
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def _records(path, nfields: int | None = None, min_fields: int = 1, text: str | None = None):
    """Yield ``(lineno, fields)`` for every data line of a text file."""
    if text is None:
        text = _read_text(path)
    for lineno, line in enumerate(text.split("\n"), 1):
        if line.endswith("\r"):
            line = line[:-1]
        if not line or line[0] == "#":
            continue
        parts = line.split(" ")
        if "" in parts or (nfields is not None and len(parts) != nfields) or len(parts) < min_fields:
            raise MalformedLine(f"{path}:{lineno}: malformed line {line!r}")
        yield lineno, parts


def _bulk_columns(text: str, nfields: int):
    """Split a clean file into columns without per-line work.

    Returns ``None`` if the text has comments, blank lines, stray spaces or
    the wrong field count anywhere; callers then use the line parser, which
    reports the offending line.
    """
    if "\r" in text or "  " in text or "\n\n" in text or "\n#" in text or "\n " in text or " \n" in text:
        return None
    if text.endswith("\n"):
        text = text[:-1]
    if not text or text[0] in " #" or text[-1] == " ":
        return None
    n = text.count("\n") + 1
    if text.count(" ") != (nfields - 1) * n:
        return None
    parts = text.replace("\n", " ").split(" ")
    return [parts[i::nfields] for i in range(nfields)]


def parse_trial_list(path) -> TrialList:
    return _parse_trials(path, check_unique=True)


def _parse_trials(path, check_unique: bool) -> TrialList:
    text = _read_text(path)
    with _gc_paused():
        cols = _bulk_columns(text, 3)
        if cols is not None:
            enroll, test, tokens = cols
            try:
                labels = [_LABEL_CODES[t] for t in tokens]
            except KeyError:
                labels = None
            if labels is not None and (not check_unique or len(set(zip(enroll, test))) == len(enroll)):
                return TrialList(enroll, test, labels)
        return _parse_trial_lines(path, text)


def _parse_trial_lines(path, text) -> TrialList:
    enroll, test, labels = [], [], []
    seen = set()
    parse_label = TrialLabel.parse
    for lineno, (enroll_id, test_id, token) in _records(path, 3, text=text):
        key = (enroll_id, test_id)
        if key in seen:
            raise DuplicateTrial(f"{path}:{lineno}: duplicate trial {enroll_id} {test_id}")
        seen.add(key)
        try:
            labels.append(parse_label(token))
        except UnknownLabel as exc:
            raise UnknownLabel(f"{path}:{lineno}: {exc}") from None
        enroll.append(enroll_id)
        test.append(test_id)
    return TrialList(enroll, test, labels)


def parse_score_file(path, system_name: str = "") -> ScoreSet:
    text = _read_text(path)
    with _gc_paused():
        cols = _bulk_columns(text, 3)
        if cols is not None:
            enroll, test, literals = cols
            try:
                values = np.array(list(map(float, literals)), dtype=np.float64)
            except ValueError:
                values = None
            if values is not None and np.all(np.isfinite(values)):
                keys = tuple(zip(enroll, test))
                index = dict(zip(keys, range(len(keys))))
                if len(index) == len(keys):
                    return ScoreSet._trusted(keys, values, index, system_name)
        return _parse_score_lines(path, text, system_name)


def _parse_score_lines(path, text, system_name) -> ScoreSet:
    keys = []
    values = []
    index = {}
    for lineno, (enroll_id, test_id, literal) in _records(path, 3, text=text):
        key = (enroll_id, test_id)
        if index.setdefault(key, len(keys)) != len(keys):
            raise DuplicateTrial(f"{path}:{lineno}: duplicate score {enroll_id} {test_id}")
        try:
            value = float(literal)
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: bad score literal {literal!r}") from None
        if not math.isfinite(value):
            raise NonFiniteScore(f"{path}:{lineno}: non-finite score {literal!r}")
        keys.append(key)
        values.append(value)
    return ScoreSet._trusted(tuple(keys), np.array(values, dtype=np.float64), index, system_name)


def parse_embeddings(path) -> EmbeddingTable:
    vectors: dict[str, np.ndarray] = {}
    dim = None
    for lineno, parts in _records(path, min_fields=2):
        utt = parts[0]
        if utt in vectors:
            raise DuplicateUtterance(f"{path}:{lineno}: duplicate utterance {utt}")
        try:
            vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: bad vector component") from None
        if not np.all(np.isfinite(vec)):
            raise MalformedLine(f"{path}:{lineno}: non-finite vector component")
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise DimensionMismatch(f"{path}:{lineno}: expected dim {dim}, got {vec.size}")
        if not np.any(vec):
            raise ZeroNormVector(f"{path}:{lineno}: zero-norm embedding {utt}")
        vectors[utt] = vec
    if dim is None:
        raise MalformedLine(f"{path}: no embeddings")
    return EmbeddingTable(dim, vectors)


def parse_enrollment_map(path) -> EnrollmentMap:
    entries: dict[str, tuple[str, ...]] = {}
    for lineno, parts in _records(path, min_fields=2):
        if parts[0] in entries:
            raise DuplicateEnrollment(f"{path}:{lineno}: duplicate enrollment {parts[0]}")
        entries[parts[0]] = tuple(parts[1:])
    return EnrollmentMap(entries)


def parse_manifest(path) -> DatasetManifest:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise MalformedManifest(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise MalformedManifest(f"{path}: top level must be an array")
    base = Path(path).parent
    entries = []
    names = set()
    for i, item in enumerate(doc):
        if not isinstance(item, dict):
            raise MalformedManifest(f"{path}: entry {i} is not an object")
        for key in ("name", "trials", "scores"):
            if not isinstance(item.get(key), str):
                raise MalformedManifest(f"{path}: entry {i} lacks string field {key!r}")
        name = item["name"]
        if name in names:
            raise DuplicateDatasetName(f"{path}: duplicate dataset name {name!r}")
        names.add(name)
        entries.append(DatasetEntry(name, base / item["trials"], base / item["scores"]))
    return DatasetManifest(tuple(entries))


def join_scores(trials: Sequence[Trial], score_set: ScoreSet, strict: bool = True) -> LabeledScores:
    """Align scores with trial labels, in trial order.

    Every trial needs a score. In strict mode every score must also belong to
    a trial; otherwise extra scores are dropped and counted in ``unmatched``.
    """
    if not isinstance(trials, TrialList):
        trials = TrialList.from_trials(trials)
    with _gc_paused():
        keys = tuple(trials.keys())
    return _join(trials, keys, score_set, strict)


def _lookup(keys: tuple[Key, ...], score_set: ScoreSet):
    """Score row for each trial key, or ``None`` at the first missing key."""
    if keys == score_set.keys_tuple[: len(keys)]:
        return np.arange(len(keys))
    found = list(map(score_set._index.get, keys))
    if None in found:
        return None
    return np.array(found, dtype=np.int64)


def _join(trials: TrialList, keys: tuple[Key, ...], score_set: ScoreSet, strict: bool, idx=None) -> LabeledScores:
    if idx is None:
        with _gc_paused():
            idx = _lookup(keys, score_set)
        if idx is None:
            e, t = next(k for k in keys if k not in score_set._index)
            raise MissingScore(f"no score for trial {e} {t}")
    # trial keys are unique, so every index above is distinct
    unmatched = len(score_set) - len(trials)
    if strict and unmatched:
        raise UnmatchedScore(f"{unmatched} score record(s) match no trial")
    return LabeledScores(score_set.values[idx], trials.labels, unmatched)


def load_labeled_scores(trials_path, scores_path, strict: bool = True, system_name: str = "") -> LabeledScores:
    """``join_scores(parse_trial_list(...), parse_score_file(...))`` with one hashing pass fewer.

    Trial-key uniqueness is not hashed separately: when every trial finds a
    distinct score row the keys are necessarily distinct.
    """
    trials = _parse_trials(trials_path, check_unique=False)
    scores = parse_score_file(scores_path, system_name)
    with _gc_paused():
        keys = tuple(trials.keys())
        idx = _lookup(keys, scores)
    if idx is None or (len(idx) and np.bincount(idx, minlength=1).max() > 1):
        # duplicate trials take precedence; reparse for the line-numbered diagnostic
        parse_trial_list(trials_path)
        idx = None
    return _join(trials, keys, scores, strict, idx)


# ---------------------------------------------------------------------------
# writing


def format_float(x: float) -> str:
    return repr(float(x))


def _current_umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


_UMASK = _current_umask()


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
            # mkstemp creates 0600; give the file the mode a plain open() would
            os.fchmod(f.fileno(), 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def format_score_set(score_set: ScoreSet) -> str:
    return "".join(f"{e} {t} {v!r}\n" for (e, t), v in zip(score_set.keys_tuple, score_set.values.tolist()))


def write_score_file(score_set: ScoreSet, path) -> None:
    atomic_write_text(path, format_score_set(score_set))


def write_trial_list(trials: Iterable[Trial], path) -> None:
    atomic_write_text(path, "".join(f"{e} {t} {TrialLabel(lab).token}\n" for e, t, lab in trials))


def write_embeddings(table: EmbeddingTable, path) -> None:
    lines = (
        utt + " " + " ".join(repr(x) for x in vec.tolist()) + "\n" for utt, vec in table.vectors.items()
    )
    atomic_write_text(path, "".join(lines))


def write_enrollment_map(enrollmap: EnrollmentMap, path) -> None:
    atomic_write_text(path, "".join(f"{e} {' '.join(u)}\n" for e, u in enrollmap.entries.items()))
