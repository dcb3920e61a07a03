"""Deterministic surrogate anticancer-peptide datasets.

The published breast/lung ACP screening sets are not redistributable here,
so this module synthesizes stand-ins that reproduce the published per-class
summary statistics exactly (class counts, shortest and longest peptide) and
the reported mean lengths to within 0.01. Residue composition carries a
class signal: each class over-samples its own five-letter arc of the
20-residue alphabet, which gives downstream classifiers a learnable but
imperfect separation, loosely mimicking the motif bias of real actives.

Use ``cgrips synth`` (or :func:`write_acp_csv`) to materialize the CSV, or
point the pipeline at a real CSV with the same columns instead.
"""

from __future__ import annotations

import numpy as np

from .cgr import PROTEIN_ALPHABET
from .seqio import ClassStats, Dataset, Sequence, write_dataset_csv

# (label, count, min length, max length, mean length), most populous first.
BREAST_STATS = (
    ("Inactive-Virtual", 750, 8, 30, 16.64),
    ("Moderate Active", 98, 10, 38, 18.44),
    ("Inactive-Experimental", 83, 5, 38, 15.02),
    ("Very Active", 18, 13, 28, 19.33),
)
LUNG_STATS = (
    ("Inactive-Virtual", 750, 8, 30, 16.64),
    ("Moderate Active", 75, 11, 38, 17.76),
    ("Inactive-Experimental", 52, 5, 38, 14.50),
    ("Very Active", 24, 13, 28, 20.70),
)
_TABLES = {"breast": BREAST_STATS, "lung": LUNG_STATS}
_ID_PREFIX = {"breast": "b", "lung": "l"}

ARC_WIDTH = 5  # residues per class-composition arc
DEFAULT_SIGNAL = 0.75  # probability a residue is drawn from the class arc


def table_stats(kind: str) -> list[ClassStats]:
    """Published per-class statistics the surrogate must reproduce."""
    if kind not in _TABLES:
        raise ValueError(f"unknown dataset kind {kind!r} (use 'breast' or 'lung')")
    return [ClassStats(*row) for row in _TABLES[kind]]


def _class_lengths(rng, count: int, lmin: int, lmax: int, mean: float) -> np.ndarray:
    """Integer lengths hitting count/min/max exactly and the mean to < 0.01."""
    target = round(count * mean)
    if count == 1:
        if not lmin <= target <= lmax:
            raise ValueError("single-member class with unreachable mean length")
        return np.array([target])
    low = lmin + lmax + (count - 2) * lmin
    high = lmin + lmax + (count - 2) * lmax
    if not low <= target <= high:
        raise ValueError("mean length incompatible with min/max bounds")
    lengths = rng.integers(lmin, lmax + 1, size=count)
    lengths[0] = lmin  # pin the extremes so min/max are achieved exactly
    lengths[1] = lmax
    diff = int(target - lengths.sum())
    while diff:
        step = 1 if diff > 0 else -1
        moved = False
        for i in range(2, count):
            if diff == 0:
                break
            if lmin <= lengths[i] + step <= lmax:
                lengths[i] += step
                diff -= step
                moved = True
        if not moved:
            raise RuntimeError("length adjustment stalled")  # unreachable given bounds
    return lengths


def synth_dataset(kind: str, seed: int = 0, signal: float = DEFAULT_SIGNAL) -> Dataset:
    """Generate the surrogate dataset for one tumor type.

    ``signal`` in [0, 1] is the per-residue probability of drawing from the
    class's own arc instead of the full alphabet; 0 removes the class signal
    entirely.
    """
    stats = table_stats(kind)
    if not 0.0 <= signal <= 1.0:
        raise ValueError("signal must be in [0, 1]")
    rng = np.random.default_rng(np.random.PCG64(seed))
    sequences: list[Sequence] = []
    serial = 0
    for ci, cs in enumerate(stats):
        arc = PROTEIN_ALPHABET[ci * ARC_WIDTH : ci * ARC_WIDTH + ARC_WIDTH]
        lengths = _class_lengths(rng, cs.count, cs.min_len, cs.max_len, cs.mean_len)
        for length in lengths:
            serial += 1
            use_arc = rng.random(length) < signal
            arc_picks = rng.integers(0, len(arc), size=length)
            any_picks = rng.integers(0, len(PROTEIN_ALPHABET), size=length)
            residues = "".join(
                arc[a] if u else PROTEIN_ALPHABET[b]
                for u, a, b in zip(use_arc, arc_picks, any_picks)
            )
            sequences.append(
                Sequence(f"{_ID_PREFIX[kind]}{serial:04d}", residues, cs.label)
            )
    return Dataset(sequences)


def write_acp_csv(dataset: Dataset, path) -> None:
    """Materialize a surrogate dataset as a loader-compatible CSV."""
    write_dataset_csv(dataset, path)
