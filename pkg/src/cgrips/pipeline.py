"""End-to-end orchestration: sequences -> complexes -> images -> metrics.

Everything here is deterministic for a fixed config. Batch work runs on a
thread pool over independent per-sequence tasks and the only shared
artifact, the manifest, is sorted by sequence id before writing, so
artifacts are invariant to thread count and scheduling.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cgr import AlphabetLayout, cgr_map
from .classify import (
    MetricsReport,
    PredictionSet,
    compute_metrics,
    image_vector,
    knn_train_predict,
    select_k,
)
from .config import PipelineConfig
from .perturb import (
    PerturbationSpec,
    RobustnessRow,
    empirical_slope,
    robustness_curve,
)
from .render import ImageGrid, read_image, render_complex, write_image
from .rips import RipsComplex, distance_matrix, rips_complex
from .seqio import (
    Dataset,
    ManifestEntry,
    Sequence,
    SplitAssignment,
    read_manifest,
    stratified_split,
    write_manifest,
)

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    """A per-sequence stage failed (geometry, complex, or rasterization)."""


def sequence_complex(
    seq: Sequence, layout: AlphabetLayout, epsilon: float, include_triangles=False
):
    """Trajectory and neighborhood complex of one sequence."""
    traj = cgr_map(seq, layout)
    cx = rips_complex(distance_matrix(traj), epsilon, include_triangles)
    return traj, cx


def sequence_image(seq: Sequence, config: PipelineConfig) -> ImageGrid:
    """One sequence straight to its rasterized complex."""
    traj, cx = sequence_complex(
        seq, config.layout(), config.epsilon, config.include_triangles
    )
    return render_complex(cx, traj, config.render_config())


@dataclass
class BatchResult:
    entries: list[ManifestEntry]
    failures: list[tuple[str, str]]  # (sequence id, reason)
    manifest_path: str


def batch_images(
    dataset: Dataset,
    out_dir,
    config: PipelineConfig,
    split: SplitAssignment | None = None,
    strict: bool = False,
) -> BatchResult:
    """Render every sequence to ``out_dir/images/<id>.png`` plus a manifest.

    Per-sequence failures are collected and reported rather than aborting
    the batch, unless ``strict``. The manifest is written last, sorted by
    id, with split assignments when a split is supplied.
    """
    layout = config.layout()
    rcfg = config.render_config()
    img_dir = os.path.join(out_dir, "images")
    os.makedirs(img_dir, exist_ok=True)

    def job(seq: Sequence) -> ManifestEntry:
        traj, cx = sequence_complex(seq, layout, config.epsilon, config.include_triangles)
        grid = render_complex(cx, traj, rcfg)
        rel = os.path.join("images", f"{seq.id}.png")
        write_image(grid, os.path.join(out_dir, rel))
        part = split.part_of(seq.id) if split is not None else ""
        return ManifestEntry(
            seq.id, seq.label, part, rel, config.epsilon, config.alpha, config.image_size
        )

    entries: list[ManifestEntry] = []
    failures: list[tuple[str, str]] = []
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        futures = [(s, pool.submit(job, s)) for s in dataset.sequences]
        for seq, fut in futures:
            try:
                entries.append(fut.result())
            except Exception as exc:
                if strict:
                    raise PipelineError(f"{seq.id}: {exc}") from exc
                log.warning("sequence %s failed: %s", seq.id, exc)
                failures.append((seq.id, str(exc)))

    entries.sort(key=lambda e: e.id)
    manifest_path = os.path.join(out_dir, "manifest.jsonl")
    write_manifest(entries, manifest_path)
    return BatchResult(entries, failures, manifest_path)


def dataset_vectors(dataset: Dataset, config: PipelineConfig) -> np.ndarray:
    """Feature vectors for all sequences, in dataset order (rows align)."""
    layout = config.layout()
    rcfg = config.render_config()

    def vec(seq: Sequence) -> np.ndarray:
        traj, cx = sequence_complex(seq, layout, config.epsilon, config.include_triangles)
        return image_vector(render_complex(cx, traj, rcfg).pixels, config.pool_factor)

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        return np.stack(list(pool.map(vec, dataset.sequences)))


def manifest_vectors(manifest_path, pool_factor: int = 4):
    """ids, labels, splits, and feature vectors read back from a rendered set."""
    entries = read_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    vecs = [
        image_vector(read_image(os.path.join(base, e.image_path)).pixels, pool_factor)
        for e in entries
    ]
    return entries, np.stack(vecs)


@dataclass
class EvalResult:
    predictions: PredictionSet
    report: MetricsReport
    k: int
    split: SplitAssignment
    label_set: list[str]


def _partition(ids, labels, X, split: SplitAssignment):
    parts = {}
    for name in ("train", "validation", "test"):
        rows = [i for i, sid in enumerate(ids) if split.part_of(sid) == name]
        parts[name] = (
            [ids[i] for i in rows],
            [labels[i] for i in rows],
            X[rows],
        )
    return parts


def _fit_and_score(ids, labels, X, split, config: PipelineConfig, label_set):
    """Select k on validation, fit on train+validation, score the test part."""
    parts = _partition(ids, labels, X, split)
    tr_ids, tr_y, tr_X = parts["train"]
    va_ids, va_y, va_X = parts["validation"]
    te_ids, te_y, te_X = parts["test"]
    if not tr_ids or not va_ids or not te_ids:
        raise PipelineError("split leaves an empty train/validation/test part")
    if len(set(tr_y)) < 2:
        raise PipelineError("training split contains a single class")
    t0 = time.perf_counter()
    k = select_k(tr_X, tr_y, va_X, va_y, config.knn_k_candidates)
    fit_X = np.concatenate([tr_X, va_X])
    fit_y = tr_y + va_y
    preds = knn_train_predict(fit_X, fit_y, te_X, k, te_y, te_ids, label_set)
    runtime = time.perf_counter() - t0
    return preds, k, runtime, (fit_X, fit_y)


def evaluate_dataset(dataset: Dataset, config: PipelineConfig) -> EvalResult:
    """Full in-memory pipeline: split, render, select k, fit, score, metrics."""
    split = stratified_split(dataset, config.test_frac, config.val_frac, config.seed)
    ids = [s.id for s in dataset.sequences]
    labels = [s.label for s in dataset.sequences]
    X = dataset_vectors(dataset, config)
    preds, k, runtime, _ = _fit_and_score(
        ids, labels, X, split, config, dataset.label_set
    )
    report = compute_metrics(preds, dataset.label_set, runtime)
    return EvalResult(preds, report, k, split, dataset.label_set)


def evaluate_manifest(manifest_path, config: PipelineConfig) -> EvalResult:
    """Like evaluate_dataset but over already-rendered images on disk."""
    entries, X = manifest_vectors(manifest_path, config.pool_factor)
    missing = [e.id for e in entries if e.split not in ("train", "validation", "test")]
    if missing:
        raise PipelineError(
            f"manifest rows without split assignment (first: {missing[0]}); "
            "re-run batch with a split"
        )
    ids = [e.id for e in entries]
    labels = [e.label for e in entries]
    label_set = sorted(set(labels))
    split = SplitAssignment(
        frozenset(e.id for e in entries if e.split == "train"),
        frozenset(e.id for e in entries if e.split == "validation"),
        frozenset(e.id for e in entries if e.split == "test"),
        config.seed,
    )
    preds, k, runtime, _ = _fit_and_score(ids, labels, X, split, config, label_set)
    report = compute_metrics(preds, label_set, runtime)
    return EvalResult(preds, report, k, split, label_set)


@dataclass
class RobustnessResult:
    rows: list[RobustnessRow]  # mean accuracy per strength, seeds averaged
    per_seed: np.ndarray  # (n_seeds, n_strengths) accuracies
    slope: float
    mutation_counts: tuple[int, ...]
    seeds: tuple[int, ...]


def robustness_assessment(
    dataset: Dataset,
    config: PipelineConfig,
    mutation_counts: tuple[int, ...] = (0, 1, 2, 4),
    n_seeds: int = 5,
) -> RobustnessResult:
    """Accuracy degradation under point mutations of the test sequences.

    For each split seed the classifier is fit on clean train+validation
    images; the test sequences are then mutated at each strength, re-imaged,
    and re-scored. Rows are the per-strength accuracies averaged over seeds.
    """
    if not mutation_counts:
        raise ValueError("empty mutation_counts")
    ids = [s.id for s in dataset.sequences]
    labels = [s.label for s in dataset.sequences]
    X = dataset_vectors(dataset, config)  # clean images are split-independent
    seq_by_id = {s.id: s for s in dataset.sequences}
    seeds = tuple(range(config.seed, config.seed + n_seeds))
    per_seed = np.zeros((n_seeds, len(mutation_counts)))
    sigma = None

    for si, seed in enumerate(seeds):
        split = stratified_split(dataset, config.test_frac, config.val_frac, seed)
        _, k, _, (fit_X, fit_y) = _fit_and_score(
            ids, labels, X, split, replace(config, seed=seed), dataset.label_set
        )
        test_seqs = [seq_by_id[sid] for sid in sorted(split.test)]

        def score(perturbed: list[Sequence]) -> float:
            Q = dataset_vectors(Dataset(perturbed), config)
            p = knn_train_predict(
                fit_X, fit_y, Q, k,
                [s.label for s in perturbed], [s.id for s in perturbed],
                dataset.label_set,
            )
            return sum(
                t == q for t, q in zip(p.true_labels, p.predicted_labels)
            ) / len(p)

        templates = [
            PerturbationSpec(mutations=m, seed=seed) for m in mutation_counts
        ]
        rows = robustness_curve(test_seqs, templates, score)
        per_seed[si] = [r.accuracy for r in rows]
        sigma = [r.sigma_l1 for r in rows]

    mean_rows = [
        RobustnessRow(sigma[j], float(per_seed[:, j].mean()))
        for j in range(len(mutation_counts))
    ]
    return RobustnessResult(
        mean_rows, per_seed, empirical_slope(mean_rows), tuple(mutation_counts), seeds
    )
