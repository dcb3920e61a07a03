"""Dataset ingestion, per-class statistics, stratified splits, manifests.

Input is tabular by default: a UTF-8 CSV with header ``id,sequence,label``
(the ``id`` column may be omitted, in which case the data row index is used).
FASTA is accepted for interoperability, with the class label taken from the
header text after the last ``|``. Rows whose residues fall outside the
configured alphabet are skipped with a diagnostic unless strict mode is on.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, asdict
from typing import NamedTuple

import numpy as np

from .cgr import PROTEIN_ALPHABET


class DatasetError(ValueError):
    """Unusable input: no valid rows, duplicate ids, bad fractions, tiny classes."""


@dataclass(frozen=True)
class Sequence:
    id: str
    residues: str
    label: str


@dataclass
class Dataset:
    sequences: list[Sequence]

    def __post_init__(self):
        self.label_set = sorted({s.label for s in self.sequences})

    def __len__(self):
        return len(self.sequences)

    def by_label(self) -> dict[str, list[Sequence]]:
        out: dict[str, list[Sequence]] = {lab: [] for lab in self.label_set}
        for s in self.sequences:
            out[s.label].append(s)
        return out


class LoadResult(NamedTuple):
    dataset: Dataset
    skipped: list[tuple[str, str]]  # (row reference, reason)


@dataclass(frozen=True)
class ClassStats:
    label: str
    count: int
    min_len: int
    max_len: int
    mean_len: float


@dataclass(frozen=True)
class SplitAssignment:
    train: frozenset[str]
    validation: frozenset[str]
    test: frozenset[str]
    seed: int

    def part_of(self, seq_id: str) -> str:
        if seq_id in self.train:
            return "train"
        if seq_id in self.validation:
            return "validation"
        if seq_id in self.test:
            return "test"
        raise KeyError(f"id {seq_id!r} is not in any split part")


@dataclass
class ManifestEntry:
    id: str
    label: str
    split: str  # "train" | "validation" | "test" | "" when not yet assigned
    image_path: str  # relative to the manifest's directory
    epsilon: float
    alpha: float
    image_size: int


def load_dataset(
    path,
    format: str = "csv",
    alphabet: str = PROTEIN_ALPHABET,
    strict: bool = False,
) -> LoadResult:
    """Load and validate a sequence dataset.

    Residues are stripped and uppercased before validation. Invalid rows are
    skipped and reported in the result unless ``strict`` is set, in which case
    the first invalid row raises DatasetError.
    """
    if format == "csv":
        rows = _read_csv(path)
    elif format == "fasta":
        rows = _read_fasta(path)
    else:
        raise DatasetError(f"unknown format {format!r} (expected csv or fasta)")

    allowed = set(alphabet)
    sequences: list[Sequence] = []
    skipped: list[tuple[str, str]] = []
    seen_ids = set()
    for ref, seq_id, residues, label in rows:
        residues = residues.strip().upper()
        reason = None
        if not residues:
            reason = "empty sequence"
        elif not label:
            reason = "missing label"
        else:
            bad = next((c for c in residues if c not in allowed), None)
            if bad is not None:
                reason = f"symbol {bad!r} not in alphabet"
        if reason is not None:
            if strict:
                raise DatasetError(f"{path}: {ref}: {reason}")
            skipped.append((ref, reason))
            continue
        if seq_id in seen_ids:
            raise DatasetError(f"{path}: duplicate id {seq_id!r}")
        seen_ids.add(seq_id)
        sequences.append(Sequence(seq_id, residues, label))

    if not sequences:
        raise DatasetError(f"{path}: no valid rows")
    return LoadResult(Dataset(sequences), skipped)


def _read_csv(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise DatasetError(f"{path}: empty file")
        fields = [name.strip().lower() for name in reader.fieldnames]
        if "sequence" not in fields or "label" not in fields:
            raise DatasetError(
                f"{path}: header must contain 'sequence' and 'label' columns"
            )
        has_id = "id" in fields
        for i, row in enumerate(reader):
            row = {k.strip().lower(): (v or "") for k, v in row.items() if k}
            seq_id = row["id"].strip() if has_id and row.get("id") else str(i)
            rows.append((f"row {i}", seq_id, row.get("sequence", ""), row.get("label", "").strip()))
    return rows


def _read_fasta(path):
    rows = []
    header = None
    buf: list[str] = []

    def flush():
        if header is None:
            return
        if "|" in header:
            seq_id, _, label = header.rpartition("|")
        else:
            seq_id, label = header, ""
        rows.append((f"record {header!r}", seq_id.strip(), "".join(buf), label.strip()))

    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith(">"):
                flush()
                header = line[1:].strip()
                buf = []
            else:
                buf.append(line)
        flush()
    return rows


def dataset_stats(d: Dataset) -> list[ClassStats]:
    """Per-class count and length summary, ordered by descending count."""
    if not d.sequences:
        raise DatasetError("empty dataset")
    out = []
    for label, seqs in d.by_label().items():
        lens = [len(s.residues) for s in seqs]
        out.append(
            ClassStats(label, len(lens), min(lens), max(lens), sum(lens) / len(lens))
        )
    out.sort(key=lambda cs: (-cs.count, cs.label))
    return out


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def stratified_split(
    d: Dataset, test_frac: float, val_frac: float, seed: int
) -> SplitAssignment:
    """Deterministic two-stage stratified split.

    Stage one holds out ``test_frac`` of each class; stage two holds out
    ``val_frac`` of each class's remainder for validation. Shuffling uses
    numpy's PCG64 generator seeded with ``seed`` (stable across platforms),
    consuming classes in lexicographic label order. Per-class part sizes are
    the rounded targets, clamped so every class keeps at least one training
    member.
    """
    items = [(s.id, s.label) for s in d.sequences]
    return stratified_split_items(items, test_frac, val_frac, seed)


def stratified_split_items(
    items: list[tuple[str, str]], test_frac: float, val_frac: float, seed: int
) -> SplitAssignment:
    """Split (id, label) pairs; see stratified_split."""
    if not 0.0 < test_frac < 1.0:
        raise DatasetError(f"test_frac must be in (0, 1), got {test_frac}")
    if not 0.0 <= val_frac < 1.0:
        raise DatasetError(f"val_frac must be in [0, 1), got {val_frac}")
    by_label: dict[str, list[str]] = {}
    for seq_id, label in items:
        by_label.setdefault(label, []).append(seq_id)
    parts = 3 if val_frac > 0 else 2
    rng = np.random.default_rng(seed)
    train: set[str] = set()
    val: set[str] = set()
    test: set[str] = set()
    for label in sorted(by_label):
        ids = by_label[label]
        n = len(ids)
        if n < parts:
            raise DatasetError(
                f"class {label!r} has {n} members but the split needs {parts}"
            )
        shuffled = [ids[i] for i in rng.permutation(n)]
        n_test = min(_round_half_up(n * test_frac), n - (parts - 1))
        rest = shuffled[n_test:]
        n_val = 0
        if parts == 3:
            n_val = min(_round_half_up(len(rest) * val_frac), len(rest) - 1)
        test.update(shuffled[:n_test])
        val.update(rest[:n_val])
        train.update(rest[n_val:])
    return SplitAssignment(frozenset(train), frozenset(val), frozenset(test), seed)


def save_split(split: SplitAssignment, path) -> None:
    payload = {
        "train": sorted(split.train),
        "validation": sorted(split.validation),
        "test": sorted(split.test),
        "seed": split.seed,
    }
    _atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def load_split(path) -> SplitAssignment:
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    return SplitAssignment(
        frozenset(raw["train"]),
        frozenset(raw["validation"]),
        frozenset(raw["test"]),
        int(raw.get("seed", 0)),
    )


def write_dataset_csv(d: Dataset, path) -> None:
    """Write a dataset back out as the id,sequence,label CSV the loader reads."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "sequence", "label"])
        for s in d.sequences:
            w.writerow([s.id, s.residues, s.label])


def write_manifest(entries: list[ManifestEntry], path) -> None:
    """Write manifest JSON lines sorted by id, atomically (write then rename)."""
    lines = [
        json.dumps(asdict(e), sort_keys=True)
        for e in sorted(entries, key=lambda e: e.id)
    ]
    _atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_manifest(path) -> list[ManifestEntry]:
    entries = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            entries.append(
                ManifestEntry(
                    id=raw["id"],
                    label=raw["label"],
                    split=raw.get("split", ""),
                    image_path=raw["image_path"],
                    epsilon=float(raw["epsilon"]),
                    alpha=float(raw["alpha"]),
                    image_size=int(raw["image_size"]),
                )
            )
    return entries


def _atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
